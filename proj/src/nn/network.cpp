#include "aered/nn/network.hpp"

#include "aered/core/error.hpp"
#include "aered/core/mixing.hpp"

#include <cmath>

namespace aered::nn {
namespace {

constexpr int kTaps = 9;

void softmax_columns(Matrix& Z) {
  for (Index n = 0; n < Z.cols(); ++n) {
    auto col = Z.col(n);
    col.array() = (col.array() - col.maxCoeff()).exp();
    col /= col.sum();
  }
}

void leaky_relu(Matrix& Z) {
  Z = Z.unaryExpr([](double z) { return z > 0.0 ? z : kLeakySlope * z; });
}

// Per-layer tensors kept for the backward pass.
struct Trace {
  std::vector<Matrix> expanded;        // im2col buffers for non-leading 3x3 blocks
  std::vector<const Matrix*> columns;  // GEMM right-hand side of each block
  std::vector<Matrix> pre;             // pre-activations
  std::vector<Matrix> post;            // activations
};

Trace run_forward(const AeParams& params, const EncoderSpec& spec, const EncoderInput& input) {
  const std::size_t L = spec.blocks.size();
  Trace t;
  t.expanded.resize(L);
  t.columns.resize(L);
  t.pre.resize(L);
  t.post.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const BlockSpec& b = spec.blocks[l];
    if (l == 0) {
      t.columns[l] = &input.first_columns();
    } else if (b.kernel_size == 3) {
      t.expanded[l] = im2col3(t.post[l - 1], input.grid());
      t.columns[l] = &t.expanded[l];
    } else {
      t.columns[l] = &t.post[l - 1];
    }
    Matrix& Z = t.pre[l];
    Z.resize(b.out_channels, input.grid().pixels());
    Z.noalias() = params.encoder[l].kernel * *t.columns[l];
    Z.colwise() += params.encoder[l].bias;
    t.post[l] = Z;
    if (b.activation == Activation::softmax) {
      softmax_columns(t.post[l]);
    } else {
      leaky_relu(t.post[l]);
    }
  }
  return t;
}

void require_congruent(const Matrix& a, Index rows, Index cols, const char* what) {
  if (a.rows() != rows || a.cols() != cols) {
    throw DimensionError(std::string(what) + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace

EncoderSpec EncoderSpec::cnn(Index bands, Index endmembers, std::vector<Index> widths) {
  if (widths.empty()) widths = {64, 32, 16, 2 * endmembers};
  if (widths.size() != 4) throw ValueError("cnn encoder needs exactly 4 hidden widths");
  EncoderSpec spec;
  spec.input_channels = bands;
  spec.blocks = {
      {3, widths[0], Activation::leaky_relu}, {3, widths[1], Activation::leaky_relu},
      {1, widths[2], Activation::leaky_relu}, {1, widths[3], Activation::leaky_relu},
      {1, endmembers, Activation::softmax},
  };
  spec.validate();
  return spec;
}

void EncoderSpec::validate() const {
  if (input_channels < 1) throw ValueError("encoder: input channel count must be >= 1");
  if (blocks.empty()) throw ValueError("encoder: no blocks");
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& b = blocks[l];
    if (b.kernel_size != 1 && b.kernel_size != 3) throw ValueError("encoder: kernel size must be 1 or 3");
    if (b.out_channels < 1) throw ValueError("encoder: block output channels must be >= 1");
    const bool last = l + 1 == blocks.size();
    if (last != (b.activation == Activation::softmax)) {
      throw ValueError("encoder: softmax is required on, and only on, the final block");
    }
  }
}

AeParams AeParams::zeros_like() const {
  AeParams z;
  z.encoder.reserve(encoder.size());
  for (const auto& b : encoder) {
    z.encoder.push_back({Matrix::Zero(b.kernel.rows(), b.kernel.cols()), Vector::Zero(b.bias.size())});
  }
  z.decoder = Matrix::Zero(decoder.rows(), decoder.cols());
  return z;
}

std::vector<std::string> AeParams::block_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < encoder.size(); ++l) {
    names.push_back("encoder[" + std::to_string(l) + "].kernel");
    names.push_back("encoder[" + std::to_string(l) + "].bias");
  }
  names.emplace_back("decoder");
  return names;
}

Index AeParams::size() const {
  Index n = decoder.size();
  for (const auto& b : encoder) n += b.kernel.size() + b.bias.size();
  return n;
}

void check_params(const AeParams& params, const EncoderSpec& spec) {
  if (params.encoder.size() != spec.blocks.size()) {
    throw DimensionError("encoder has " + std::to_string(params.encoder.size()) + " blocks, spec has " +
                         std::to_string(spec.blocks.size()));
  }
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const auto& b = spec.blocks[l];
    const Index fan_in = b.kernel_size * b.kernel_size * spec.block_input_channels(l);
    require_congruent(params.encoder[l].kernel, b.out_channels, fan_in, "encoder kernel");
    if (params.encoder[l].bias.size() != b.out_channels) throw DimensionError("encoder bias length mismatch");
  }
  require_congruent(params.decoder, spec.input_channels, spec.endmembers(), "decoder");
}

EncoderInput::EncoderInput(const EncoderSpec& spec, const HyperspectralImage& Y)
    : image_(Y.data()), grid_(Y.grid()) {
  spec.validate();
  if (Y.bands() != spec.input_channels) {
    throw DimensionError("encoder expects " + std::to_string(spec.input_channels) + " input channels, image has " +
                         std::to_string(Y.bands()) + " bands");
  }
  if (spec.blocks.front().kernel_size == 3) {
    columns_ = im2col3(image_, grid_);
    expanded_ = true;
  }
}

Matrix im2col3(const Matrix& X, Grid grid) {
  const Index C = X.rows();
  Matrix out = Matrix::Zero(kTaps * C, grid.pixels());
  for (Index i = 0; i < grid.height; ++i) {
    for (Index j = 0; j < grid.width; ++j) {
      const Index n = grid.index(i, j);
      for (int dy = -1; dy <= 1; ++dy) {
        const Index ii = i + dy;
        if (ii < 0 || ii >= grid.height) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const Index jj = j + dx;
          if (jj < 0 || jj >= grid.width) continue;
          const Index tap = (dy + 1) * 3 + (dx + 1);
          out.col(n).segment(tap * C, C) = X.col(grid.index(ii, jj));
        }
      }
    }
  }
  return out;
}

void col2im3_add(const Matrix& columns, Grid grid, Matrix& dX) {
  const Index C = dX.rows();
  for (Index i = 0; i < grid.height; ++i) {
    for (Index j = 0; j < grid.width; ++j) {
      const Index n = grid.index(i, j);
      for (int dy = -1; dy <= 1; ++dy) {
        const Index ii = i + dy;
        if (ii < 0 || ii >= grid.height) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const Index jj = j + dx;
          if (jj < 0 || jj >= grid.width) continue;
          const Index tap = (dy + 1) * 3 + (dx + 1);
          dX.col(grid.index(ii, jj)) += columns.col(n).segment(tap * C, C);
        }
      }
    }
  }
}

Matrix encode(const AeParams& params, const EncoderSpec& spec, const EncoderInput& input) {
  check_params(params, spec);
  Trace t = run_forward(params, spec, input);
  return std::move(t.post.back());
}

AbundanceMatrix encoder_forward(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y) {
  return AbundanceMatrix(encode(params, spec, EncoderInput(spec, Y)));
}

HyperspectralImage decoder_forward(const EndmemberMatrix& S, const AbundanceMatrix& A, Grid grid) {
  return lmm_mix(S, A, grid);
}

LossParts ae_loss(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y, const Matrix& A,
                  const Matrix& G, double mu) {
  if (mu < 0.0) throw ValueError("ae_loss: mu must be >= 0");
  const Matrix E = encode(params, spec, EncoderInput(spec, Y));
  require_congruent(A, E.rows(), E.cols(), "auxiliary abundances A");
  require_congruent(G, E.rows(), E.cols(), "dual variable G");
  LossParts parts;
  parts.reconstruction = (Y.data() - lmm_product(params.decoder, E)).squaredNorm();
  parts.coupling = (A - E - G).squaredNorm();
  parts.total = parts.reconstruction + mu * parts.coupling;
  return parts;
}

LossAndGradients ae_loss_gradients(const AeParams& params, const EncoderSpec& spec, const EncoderInput& input,
                                   const Matrix& A, const Matrix& G, double mu, const Matrix* fixed_abundances) {
  if (mu < 0.0) throw ValueError("ae_loss: mu must be >= 0");
  check_params(params, spec);
  const Index R = spec.endmembers();
  const Index N = input.grid().pixels();
  require_congruent(A, R, N, "auxiliary abundances A");
  require_congruent(G, R, N, "dual variable G");

  LossAndGradients out;
  out.gradients = params.zeros_like();

  Trace trace;
  if (fixed_abundances != nullptr) {
    require_congruent(*fixed_abundances, R, N, "fixed abundances");
    out.encoded = *fixed_abundances;
  } else {
    trace = run_forward(params, spec, input);
    out.encoded = trace.post.back();
  }
  const Matrix& E = out.encoded;

  Matrix residual = lmm_product(params.decoder, E);
  residual -= input.image();  // S E - Y
  const Matrix coupling = A - E - G;
  out.loss.reconstruction = residual.squaredNorm();
  out.loss.coupling = coupling.squaredNorm();
  out.loss.total = out.loss.reconstruction + mu * out.loss.coupling;

  out.gradients.decoder.noalias() = 2.0 * residual * E.transpose();
  if (fixed_abundances != nullptr) return out;

  Matrix upstream(R, N);
  upstream.noalias() = 2.0 * params.decoder.transpose() * residual;
  upstream -= (2.0 * mu) * coupling;

  for (std::size_t l = spec.blocks.size(); l-- > 0;) {
    const BlockSpec& b = spec.blocks[l];
    Matrix dZ;
    if (b.activation == Activation::softmax) {
      const Matrix& Y = trace.post[l];
      const Eigen::RowVectorXd inner = (Y.array() * upstream.array()).colwise().sum();
      dZ = Y.array() * (upstream.array().rowwise() - inner.array());
    } else {
      dZ = upstream.array() * trace.pre[l].unaryExpr([](double z) { return z > 0.0 ? 1.0 : kLeakySlope; }).array();
    }
    ConvBlock& g = out.gradients.encoder[l];
    g.kernel.noalias() = dZ * trace.columns[l]->transpose();
    g.bias = dZ.rowwise().sum();
    if (l == 0) break;

    Matrix dcols(params.encoder[l].kernel.cols(), N);
    dcols.noalias() = params.encoder[l].kernel.transpose() * dZ;
    if (b.kernel_size == 3) {
      upstream = Matrix::Zero(spec.block_input_channels(l), N);
      col2im3_add(dcols, input.grid(), upstream);
    } else {
      upstream = std::move(dcols);
    }
  }
  return out;
}

LossAndGradients ae_loss_gradients(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y,
                                   const Matrix& A, const Matrix& G, double mu) {
  return ae_loss_gradients(params, spec, EncoderInput(spec, Y), A, G, mu);
}

}  // namespace aered::nn

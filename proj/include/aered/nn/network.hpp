#pragma once

#include "aered/core/types.hpp"

#include <string>
#include <vector>

namespace aered::nn {

inline constexpr double kLeakySlope = 0.01;

enum class Activation { leaky_relu, softmax };

struct BlockSpec {
  Index kernel_size = 1;  // 1 or 3; 3x3 blocks use stride 1 and zero padding 1
  Index out_channels = 0;
  Activation activation = Activation::leaky_relu;
};

/// Convolutional encoder layout. The last block must be softmax with R outputs.
struct EncoderSpec {
  Index input_channels = 0;
  std::vector<BlockSpec> blocks;

  /// Two 3x3 blocks, two 1x1 blocks, one 1x1 softmax block:
  /// B -> widths[0] -> widths[1] -> widths[2] -> widths[3] -> R.
  /// An empty `widths` means {64, 32, 16, 2R}.
  static EncoderSpec cnn(Index bands, Index endmembers, std::vector<Index> widths = {});

  Index endmembers() const { return blocks.empty() ? 0 : blocks.back().out_channels; }
  Index block_input_channels(std::size_t block) const {
    return block == 0 ? input_channels : blocks[block - 1].out_channels;
  }
  /// Throws ValueError on an inconsistent layout.
  void validate() const;
};

/// One convolution block. `kernel` is out x (k*k*in), column index = tap*in + channel,
/// with taps ordered row-major over the k x k window.
struct ConvBlock {
  Matrix kernel;
  Vector bias;
};

/// Trainable parameters. The decoder weight block is the B x R endmember matrix.
struct AeParams {
  std::vector<ConvBlock> encoder;
  Matrix decoder;

  /// Same shapes, all zeros.
  AeParams zeros_like() const;
  /// Human-readable names ("encoder[0].kernel", ..., "decoder") in visiting order.
  std::vector<std::string> block_names() const;
  /// Flattened total parameter count.
  Index size() const;
};

/// Checks that params match the spec and the decoder is B x R.
void check_params(const AeParams& params, const EncoderSpec& spec);

/// Encoder input prepared once per image: the im2col expansion of Y for a leading 3x3 block.
class EncoderInput {
 public:
  EncoderInput(const EncoderSpec& spec, const HyperspectralImage& Y);

  const Matrix& image() const { return image_; }
  /// Input to the first block's matrix product (patch columns or the image itself).
  const Matrix& first_columns() const { return expanded_ ? columns_ : image_; }
  Grid grid() const { return grid_; }

 private:
  Matrix image_;
  Matrix columns_;
  Grid grid_;
  bool expanded_ = false;
};

/// k x k (k = 3) zero-padded patch expansion: (9*C) x N.
Matrix im2col3(const Matrix& X, Grid grid);
/// Adjoint of im2col3, accumulated into dX (C x N).
void col2im3_add(const Matrix& columns, Grid grid, Matrix& dX);

/// E(Y) as a raw R x N matrix (columns are softmax outputs).
Matrix encode(const AeParams& params, const EncoderSpec& spec, const EncoderInput& input);

/// E(Y), validated as an abundance matrix.
AbundanceMatrix encoder_forward(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y);

/// Decoder = linear mixing, shared with lmm_mix.
HyperspectralImage decoder_forward(const EndmemberMatrix& S, const AbundanceMatrix& A, Grid grid);

struct LossParts {
  double reconstruction = 0.0;  // ||Y - S E||_F^2
  double coupling = 0.0;        // ||A - E - G||_F^2 (unweighted)
  double total = 0.0;           // reconstruction + mu * coupling
};

/// ||Y - S E(Y)||^2 + mu ||A - E(Y) - G||^2.
LossParts ae_loss(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y, const Matrix& A,
                  const Matrix& G, double mu);

struct LossAndGradients {
  LossParts loss;
  AeParams gradients;
  Matrix encoded;  // E(Y) at the evaluation point
};

/// Exact reverse-mode gradients of ae_loss with respect to every parameter block.
/// When `fixed_abundances` is non-null the encoder is bypassed: E is replaced by
/// that matrix and encoder gradients are zero.
LossAndGradients ae_loss_gradients(const AeParams& params, const EncoderSpec& spec, const EncoderInput& input,
                                   const Matrix& A, const Matrix& G, double mu,
                                   const Matrix* fixed_abundances = nullptr);

LossAndGradients ae_loss_gradients(const AeParams& params, const EncoderSpec& spec, const HyperspectralImage& Y,
                                   const Matrix& A, const Matrix& G, double mu);

}  // namespace aered::nn

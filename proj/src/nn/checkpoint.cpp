#include "aered/nn/checkpoint.hpp"

#include "aered/core/error.hpp"
#include "aered/core/fmx.hpp"

#include <json.hpp>

#include <fstream>

namespace aered::nn {
namespace {

std::string block_file(std::size_t l, const char* part) {
  return "encoder_" + std::to_string(l) + "_" + part + ".fmx";
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& c) {
  check_params(c.params, c.spec);
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["input_channels"] = c.spec.input_channels;
  manifest["step"] = c.step;
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t l = 0; l < c.spec.blocks.size(); ++l) {
    const auto& b = c.spec.blocks[l];
    blocks.push_back({{"kernel_size", b.kernel_size},
                      {"out_channels", b.out_channels},
                      {"activation", b.activation == Activation::softmax ? "softmax" : "leaky_relu"},
                      {"kernel", block_file(l, "kernel")},
                      {"bias", block_file(l, "bias")},
                      {"kernel_shape", {c.params.encoder[l].kernel.rows(), c.params.encoder[l].kernel.cols()}}});
    fmx::write(dir / block_file(l, "kernel"), c.params.encoder[l].kernel);
    fmx::write(dir / block_file(l, "bias"), c.params.encoder[l].bias);
  }
  manifest["blocks"] = blocks;
  manifest["decoder"] = "decoder.fmx";
  manifest["decoder_shape"] = {c.params.decoder.rows(), c.params.decoder.cols()};
  fmx::write(dir / "decoder.fmx", c.params.decoder);
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("cannot write checkpoint manifest in " + dir.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("checkpoint " + dir.string() + " has no manifest.json");
  nlohmann::json manifest;
  try {
    in >> manifest;
    Checkpoint c;
    c.spec.input_channels = manifest.at("input_channels").get<Index>();
    c.step = manifest.value("step", 0L);
    for (const auto& b : manifest.at("blocks")) {
      BlockSpec bs;
      bs.kernel_size = b.at("kernel_size").get<Index>();
      bs.out_channels = b.at("out_channels").get<Index>();
      bs.activation = b.at("activation").get<std::string>() == "softmax" ? Activation::softmax : Activation::leaky_relu;
      c.spec.blocks.push_back(bs);
      ConvBlock block;
      block.kernel = fmx::read(dir / b.at("kernel").get<std::string>());
      const Matrix bias = fmx::read(dir / b.at("bias").get<std::string>());
      if (bias.cols() != 1) throw ParseError("checkpoint bias must be a column vector");
      block.bias = bias.col(0);
      c.params.encoder.push_back(std::move(block));
    }
    c.params.decoder = fmx::read(dir / manifest.at("decoder").get<std::string>());
    c.spec.validate();
    check_params(c.params, c.spec);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint manifest " + (dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace aered::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "blurgp/ep.hpp"

namespace blurgp {

inline constexpr int kModelFormatVersion = 1;

/// A fitted model as written to disk: posterior, likelihood and the EP
/// settings that produced it.
struct Model {
  PosteriorState state;
  Likelihood likelihood;
  EpConfig ep_config;
  std::uint64_t seed = 0;
};

/// JSON document with fields version, kernel{sigma,dim},
/// basis[{center,cov,precision,virtual_target}], khat_jitter, alpha, beta,
/// likelihood, ep_config and seed. Doubles are written in a form that
/// reads back bit-identically.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace blurgp

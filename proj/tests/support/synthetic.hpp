#pragma once

#include <cstddef>
#include <cstdint>

#include "chicle/ingest.hpp"

namespace chicle::synth {

// Examples drawn from a low-dimensional latent space whose coordinates are
// repeated over several feature blocks (with per-copy jitter), so examples
// are strongly correlated. Labels come from a random linear teacher on the
// latent vector with a share of flipped labels.
struct CorrelatedSpec {
  std::size_t examples = 10000;
  std::size_t latent = 8;
  std::size_t copies = 4;
  double jitter = 0.05;
  double flip_rate = 0.05;
  // Extra per-example sparse features outside the shared blocks.
  std::size_t private_features = 0;
  std::size_t private_per_example = 0;
  std::uint64_t seed = 7;
};

Dataset correlated(const CorrelatedSpec& spec);

// Small independent random problem (sparse, uncorrelated).
Dataset random_sparse(std::size_t examples, std::size_t features, double density, std::uint64_t seed);

}  // namespace chicle::synth

// Copyright 2026 The peepvec Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PEEPVEC_VEXNET_HPP
#define PEEPVEC_VEXNET_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "peepvec/embedder.hpp"
#include "peepvec/rng.hpp"
#include "peepvec/tensor.hpp"

// The fine-tuning network. Each of the five input channels (O, T, A, S, L)
// is L2-normalized, projected to a context vector, batch-normalized and
// passed through SiLU. A learned vector u scores the context vectors, a
// softmax over the present channels weights them, and the weighted sum is
// projected to the output embedding.
namespace peepvec {

inline constexpr std::size_t kChannels = 5;
// Channels that are masked out of the attention softmax when their input is zero.
inline constexpr std::size_t kStringChannel = 3;
inline constexpr std::size_t kLibraryChannel = 4;

struct VexNetConfig {
  std::array<std::size_t, kChannels> in_dims{kVocabDim, kVocabDim, kVocabDim, kTextDim, kTextDim};
  std::size_t context_dim = 180;
  std::size_t out_dim = 128;
  double dropout = 0.02;
  double temperature = 0.05;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  double lr_decay = 0.817;
  std::size_t epochs = 30;
  std::uint64_t seed = kDefaultSeed;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  bool same_architecture(const VexNetConfig& other) const;
  friend bool operator==(const VexNetConfig&, const VexNetConfig&) = default;
};

struct Projection {
  Matrix weight;        // in_dim x context_dim
  Matrix bias;          // 1 x context_dim
  Matrix bn_gamma;      // 1 x context_dim
  Matrix bn_beta;       // 1 x context_dim
  Matrix running_mean;  // 1 x context_dim
  Matrix running_var;   // 1 x context_dim
  friend bool operator==(const Projection&, const Projection&) = default;
};

struct VexNetModel {
  VexNetConfig config;
  std::array<Projection, kChannels> inputs;
  Matrix attention;  // context_dim x 1
  Matrix out_weight;  // context_dim x out_dim
  Matrix out_bias;    // 1 x out_dim

  // Seeded initialization: weights and biases uniform in +-1/sqrt(fan_in),
  // gamma 1, beta 0, running mean 0, running variance 1.
  static VexNetModel init(const VexNetConfig& config);

  // Trainable parameters in a fixed order.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  // Every named block, trainable or not, in file order.
  std::vector<std::pair<std::string, Matrix*>> blocks();
  std::vector<std::pair<std::string, const Matrix*>> blocks() const;

  friend bool operator==(const VexNetModel&, const VexNetModel&) = default;
};

using NetInput = std::array<std::vector<double>, kChannels>;

NetInput network_input(const FunctionEmbedding& e);
// x / |x|, with the zero vector left unchanged.
std::vector<double> l2_normalized(std::span<const double> x);

struct ForwardResult {
  std::vector<double> F;
  std::array<double, kChannels> alpha{};
};

struct BatchForward {
  Matrix F;      // batch x out_dim
  Matrix alpha;  // batch x kChannels
};

// Batched forward pass. In train mode batch-norm uses batch statistics and
// dropout masks are drawn from seed; otherwise both are inactive and each row
// depends only on its own input. Throws std::invalid_argument on a
// dimension mismatch.
BatchForward forward_batch(const VexNetModel& m, std::span<const NetInput> inputs, bool train_mode = false,
                           std::uint64_t seed = 0);
ForwardResult forward(const VexNetModel& m, const NetInput& input, bool train_mode = false, std::uint64_t seed = 0);
ForwardResult forward(const VexNetModel& m, const FunctionEmbedding& e, bool train_mode = false,
                      std::uint64_t seed = 0);

// Inference-mode outputs for many functions, one row each.
Matrix embed_all(const VexNetModel& m, std::span<const NetInput> inputs, std::size_t workers = 1);

struct MinedPair {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  friend bool operator==(const MinedPair&, const MinedPair&) = default;
};

// For each anchor with an in-batch positive, the closest same-group sample
// and the closest other-group sample, ties to the smaller index. Throws
// std::invalid_argument unless the batch holds at least two groups.
std::vector<MinedPair> mine_batch(const Matrix& distances, std::span<const std::uint32_t> labels);

// 1 - cos(a, b) for every pair of rows.
Matrix cosine_distances(const Matrix& z);

struct NtXentResult {
  double loss = 0;
  Matrix grad;  // same shape as z
};

// NT-Xent over the given anchor/positive pairs. Throws std::invalid_argument
// when a pair's positive is not in the anchor's group or equals the anchor.
NtXentResult ntxent_loss(const Matrix& z, std::span<const std::uint32_t> labels, std::span<const MinedPair> pairs,
                         double tau);

// Loss of one training step on a batch and, if grads is non-null, its
// gradient for every trainable parameter (same order as parameters()).
// stats receives the per-channel batch statistics.
double batch_loss(const VexNetModel& m, std::span<const NetInput> inputs, std::span<const MinedPair> pairs,
                  std::uint64_t seed, std::vector<Matrix>* grads = nullptr,
                  std::array<ops::BatchStats, kChannels>* stats = nullptr);

struct HistoryRow {
  std::size_t epoch = 0;
  double loss = 0;
  double lr = 0;
};

struct TrainResult {
  VexNetModel model;
  std::vector<HistoryRow> history;
  double initial_spread = 0;  // mean distinct-group cosine distance on the validation slice
  double final_spread = 0;
  bool collapse_warning = false;
};

// Training reports a collapse when the final spread is at most
// kCollapseRatio times the initial one or below kCollapseFloor.
inline constexpr double kCollapseRatio = 0.1;
inline constexpr double kCollapseFloor = 1e-9;
inline constexpr std::size_t kValidationSlice = 256;

// Trains from the given model using the training fields of cfg (batch size,
// lr, decay, epochs, seed); cfg's architecture must match the model's.
// labels[i] is the group of inputs[i]. Throws std::invalid_argument on an
// empty dataset, a single group, or mismatched sizes.
TrainResult train(VexNetModel model, std::span<const NetInput> inputs, std::span<const std::uint32_t> labels,
                  const VexNetConfig& cfg);

std::string format_history(std::span<const HistoryRow> history);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_model(const VexNetModel& m);
VexNetModel parse_model(std::string_view text);
void save_model(const VexNetModel& m, const std::filesystem::path& path);
VexNetModel load_model(const std::filesystem::path& path);

}  // namespace peepvec

#endif  // PEEPVEC_VEXNET_HPP

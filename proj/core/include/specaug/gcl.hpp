#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specaug/augment.hpp"
#include "specaug/graph.hpp"

namespace specaug {

enum class ConvKind { kGcn, kGin };
enum class PoolKind { kMean, kSum };

/// Source of the InfoNCE denominator H~. kCorrupted contrasts against the
/// encoder run on feature-row-shuffled inputs (DGI-style discrimination);
/// the view readings restrict the denominator to real node reps.
enum class NegativeMode { kCorrupted, kOppositeView, kSameView };

/// GNN encoder parameters. Layers apply ReLU between them, last layer
/// linear.
struct EncoderState {
    std::vector<Matrix> layer_weights;  // d_in x d_out per layer
    ConvKind conv_kind = ConvKind::kGcn;
    double gin_epsilon = 0.0;
};

struct ReadoutState {
    PoolKind pool = PoolKind::kMean;
    Matrix proj;  // d' x d'
};

struct TrainConfig {
    int epochs = 100;
    double lr = 0.01;
    double feature_mask_ratio = 0.0;  // sigma_f in [0,1)
    std::uint64_t seed = 0;
    int batch_size = 0;   // 0 = all graphs every epoch
    int hidden_dim = 32;
    int layers = 2;
    ConvKind conv_kind = ConvKind::kGcn;
    PoolKind pool = PoolKind::kMean;
    bool use_adam = false;  // default plain gradient descent
    int start_epoch = 0;    // resume point; epochs is still the end index
    NegativeMode negatives = NegativeMode::kCorrupted;
};

/// uniform(-1/sqrt(d_in), 1/sqrt(d_in)) initialization, seeded.
EncoderState init_encoder(int d_in, int hidden_dim, int layers, ConvKind kind,
                          std::uint64_t seed);
ReadoutState init_readout(int dim, PoolKind pool, std::uint64_t seed);

/// GCN propagation with the renormalization trick; GIN propagation
/// (1+eps) I + D^{-1/2} A D^{-1/2} with no added self-loops.
Matrix propagation_matrix(const Graph& g, ConvKind kind, double gin_epsilon);

Matrix gcn_forward(const Graph& g, const Matrix& x, const EncoderState& enc);
Matrix gin_forward(const Graph& g, const Matrix& x, const EncoderState& enc);
Matrix encoder_forward(const Graph& g, const Matrix& x,
                       const EncoderState& enc);

Vector readout(const Matrix& node_reps, const ReadoutState& r);

/// Zeroes round(sigma_f * d) feature columns, shared across nodes.
Matrix feature_mask(const Matrix& x, double sigma_f, std::uint64_t seed);

/// InfoNCE estimate of I(h_i, z): log softmax of cosine similarities with
/// the positive's row included in the negative set. Zero-norm vectors score
/// cosine 0.
double infonce_mi(const Vector& h_i, const Vector& z, const Matrix& negatives);

/// Cross-level two-view loss: -(1/n) sum_i [I(H1_i, z2) + I(H2_i, z1)].
/// Negatives per NegativeMode; for kCorrupted the denominator uses the
/// encoder applied to row-shuffled copies of x1/x2 (x1_corrupt/x2_corrupt).
double gcl_loss(const Graph& view1, const Graph& view2, const Matrix& x1,
                const Matrix& x2, const EncoderState& enc,
                const ReadoutState& r,
                NegativeMode mode = NegativeMode::kOppositeView,
                const Matrix* x1_corrupt = nullptr,
                const Matrix* x2_corrupt = nullptr);

struct GclGradients {
    std::vector<Matrix> layer_grads;
    Matrix proj_grad;
};

/// Batched loss and exact reverse-mode parameter gradients. For multiple
/// graphs the InfoNCE denominator runs over all node representations of the
/// negative source across the batch. kCorrupted requires x1_corrupts /
/// x2_corrupts (row permutations of the masked features); gradients flow
/// through the corrupted forward passes as well.
double gcl_loss_and_grad(const std::vector<Graph>& view1s,
                         const std::vector<Graph>& view2s,
                         const std::vector<Matrix>& x1s,
                         const std::vector<Matrix>& x2s,
                         const EncoderState& enc, const ReadoutState& r,
                         GclGradients* grads,
                         NegativeMode mode = NegativeMode::kOppositeView,
                         const std::vector<Matrix>* x1_corrupts = nullptr,
                         const std::vector<Matrix>* x2_corrupts = nullptr);

struct TrainResult {
    EncoderState encoder;
    ReadoutState readout_state;
    std::vector<double> loss_curve;
};

/// Two-branch contrastive training: per epoch sample a perturbation per
/// branch per graph, mask features independently per branch, descend the
/// cross-level InfoNCE loss. Deterministic given cfg.seed. Throws on NaN
/// loss.
/// Per-epoch randomness is derived from (seed, epoch), so training
/// [0, epochs) equals training [0, k) then resuming from the saved state at
/// start_epoch = k bitwise (plain gradient descent; Adam moments are not
/// checkpointed).
TrainResult train(const std::vector<Graph>& graphs,
                  const std::vector<AugmentationScheme>& schemes,
                  const TrainConfig& cfg,
                  const EncoderState* resume_encoder = nullptr,
                  const ReadoutState* resume_readout = nullptr);

struct ProbeResult {
    double metric = 0.0;       // accuracy or rmse
    double selected_l2 = 0.0;  // chosen on the validation split
};

/// Multinomial logistic regression on frozen representations; 60/20/20
/// split, L2 weight selected on validation from
/// {0.001, 0.01, 0.1, 1, 10, 100}; returns test accuracy.
ProbeResult linear_probe(const Matrix& reps, const std::vector<int>& labels,
                         std::uint64_t split_seed);

/// Closed-form ridge regression under the same protocol; returns test RMSE.
ProbeResult ridge_probe(const Matrix& reps, const Vector& targets,
                        std::uint64_t split_seed);

/// One-hot degree features, degree capped at max_bins - 1.
Matrix one_hot_degree_features(const Graph& g, int max_bins = 32);

/// Checkpoint JSON: shapes + row-major arrays at 17 significant digits.
std::string checkpoint_to_json(const EncoderState& enc, const ReadoutState& r);
void checkpoint_from_json(const std::string& text, EncoderState* enc,
                          ReadoutState* r);

}  // namespace specaug

#pragma once

#include "lwgan/models.hpp"
#include "lwgan/objective.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace lwgan {

/// Hyperparameters of the minimax loop.
struct TrainConfig {
    ModelKind mode = ModelKind::Lwgan;
    long iterations = 3000;     // T, hard cap on outer iterations
    Index batch_size = 256;     // M
    int critic_steps = 5;       // L
    double lambda_gp = 5.0;
    nn::AdamConfig critic_adam{};
    nn::AdamConfig gq_adam{};
    std::uint64_t seed = 0;
    /// Trailing-window plateau rule; a window of 0 disables it.
    long convergence_window = 200;
    double convergence_tol = 1e-3;
    /// Weight of the MMD term for the WAE baseline.
    double wae_lambda = 1.0;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Monitors for one outer iteration. WGAN runs log recon = 0; WAE runs log the
/// MMD term in the critic-gap columns and gp = 0.
struct IterationRecord {
    long iter = 0;
    Index rank = 0;
    double critic_gap_pre = 0.0;
    double critic_gap_post = 0.0;
    double recon = 0.0;
    double gp = 0.0;
    double total = 0.0;
};

struct TrainHistory {
    std::vector<IterationRecord> records;
    bool converged = false;
};

struct TrainResult {
    LwganModel model;
    TrainHistory history;
};

/// Raised when a loss or gradient becomes non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(long iteration, const std::string& what);
    [[nodiscard]] long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

/// True when the mean of the last `window` totals differs from the mean of the
/// `window` before it by less than `tol` relative.
bool plateaued(const std::vector<IterationRecord>& records, long window, double tol);

/// L critic updates on frozen G and Q at rank `rank`, ascending the critic gap
/// minus lambda_gp times the gradient penalty. Returns the last penalty value.
double lwgan_critic_phase(LwganModel& model, nn::AdamState& opt, const Matrix& data, Index rank,
                          const TrainConfig& config, Rng& rng, long iter = 0);
/// Same for the WGAN baseline: real data against G(z) on the full latent.
double wgan_critic_phase(LwganModel& model, nn::AdamState& opt, const Matrix& data, const TrainConfig& config,
                         Rng& rng, long iter = 0);

/// Latent-rank-aware minimax training: each outer iteration draws s uniformly
/// from 1..d, takes L critic steps ascending the critic gap minus the gradient
/// penalty, then one encoder/generator step descending the empirical loss.
/// `model` supplies the starting parameters (fresh or warm start); optimizer
/// state always starts fresh. Throws std::invalid_argument when n < M.
TrainResult train_lwgan(const TrainConfig& config, const Matrix& data, LwganModel model);

/// Gradient-penalty WGAN on a full-rank N(0, I_d) latent; `model` must be of
/// kind Wgan.
TrainResult train_wgan(const TrainConfig& config, const Matrix& data, LwganModel model);

/// Deterministic auto-encoder with a Gaussian-kernel MMD between the encoded
/// batch and an N(0, I_d) batch; `model` must be of kind Wae.
TrainResult train_wae(const TrainConfig& config, const Matrix& data, LwganModel model);

/// Dispatches on config.mode.
TrainResult train(const TrainConfig& config, const Matrix& data, LwganModel model);

/// Unbiased MMD^2 with kernel exp(-||a - b||^2 / (2 h^2)). `q` may be graph
/// attached; `z` is a constant sample of the same shape.
ad::Tensor mmd_gaussian(const ad::Tensor& q, const Matrix& z, double bandwidth);
/// Median of all pairwise distances in the pooled rows of a and b.
double median_pairwise_distance(const Matrix& a, const Matrix& b);

/// Metrics CSV with header iter,rank_s,critic_gap_pre,critic_gap_post,recon,gp.
void write_metrics_csv(const TrainHistory& history, const std::filesystem::path& path);
/// Reads a metrics CSV back; `total` is not stored and is left at 0.
TrainHistory read_metrics_csv(const std::filesystem::path& path);

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON: header (format, version, mode, p, d) plus one section per
/// network with its spec and row-major parameter arrays.
void save_checkpoint(const LwganModel& model, const std::filesystem::path& path);
/// Throws CheckpointError on version mismatch or malformed content.
LwganModel load_checkpoint(const std::filesystem::path& path);

}  // namespace lwgan

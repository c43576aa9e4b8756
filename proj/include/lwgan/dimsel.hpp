#pragma once

#include "lwgan/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

namespace lwgan {

/// Per-rank scores for s = 1..d (index s - 1).
struct RankScoreTable {
    std::vector<double> v_hat;
    std::vector<double> rho_hat;
    std::vector<double> recon;
    double lambda = 0.0;
    Index r_hat = 0;

    [[nodiscard]] Index dim() const noexcept { return static_cast<Index>(v_hat.size()); }
};

/// Builds the table from raw V_hat values: rho = V_hat + lambda * s and the
/// smallest argmin.
RankScoreTable make_score_table(std::vector<double> v_hat, std::vector<double> recon, double lambda);

/// V_hat(A_s) over every row of `data` with one latent sample per rank drawn
/// from the evaluation stream of `eval_seed`. Throws std::domain_error on a
/// non-finite V_hat.
RankScoreTable estimate_rank(const LwganModel& model, const Matrix& data, double lambda, std::uint64_t eval_seed);

struct LambdaConfig {
    long iterations = 20;          // fine-tuning steps per subset
    int subsets = 50;              // number of subsets
    double subset_fraction = 0.5;  // drawn without replacement
    double lambda_min = 1e-8;
    double exponent = 0.8;
    /// Settings for the fine-tuning runs; `iterations` and `seed` are overridden.
    TrainConfig train{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct LambdaSelection {
    double lambda = 0.0;
    double se = 0.0;
    Index r_tilde = 0;
    std::vector<double> column_means;
    Matrix v_hat;  // subsets x d
};

/// lambda = max(SE^exponent, lambda_min) where SE is the sample standard
/// deviation of the column with the smallest mean. Throws
/// std::invalid_argument for fewer than two rows.
LambdaSelection lambda_from_scores(const Matrix& v_hat, double lambda_min = 1e-8, double exponent = 0.8);

/// Warm-start fine-tuning on random subsets followed by lambda_from_scores.
LambdaSelection select_lambda(const LwganModel& model, const Matrix& data, const LambdaConfig& config);

struct BootstrapConfig {
    long rounds = 100;
    /// Simulated sample size; 0 means the size of the original data.
    Index n_boot = 0;
    bool warm_start = true;
    /// Retraining settings per round; `seed` is overridden per round.
    TrainConfig train{};
    std::uint64_t seed = 0;

    void validate() const;
};

struct BootstrapSummary {
    std::vector<Index> r_boot;
    std::map<Index, long> frequency;

    [[nodiscard]] long rounds() const noexcept { return static_cast<long>(r_boot.size()); }
    /// Most frequent estimate, smallest on ties; 0 when empty.
    [[nodiscard]] Index mode() const noexcept;
    /// Fraction of rounds equal to `rank`; 0 when empty.
    [[nodiscard]] double mass(Index rank) const noexcept;
};

/// Simulates data from G(A_r z), retrains (warm or cold start), and
/// re-estimates the rank with the fixed `lambda` each round.
BootstrapSummary bootstrap_dimension(const LwganModel& model, Index r_hat, double lambda, Index n_original,
                                     const BootstrapConfig& config);

/// `s,V_hat,rho_hat,recon`
void write_score_csv(const RankScoreTable& table, const std::filesystem::path& path);
/// `round,r_boot`
void write_bootstrap_csv(const BootstrapSummary& summary, const std::filesystem::path& path);
/// {"rounds": R, "mode": m, "frequency": {"1": count, ...}}
void write_bootstrap_json(const BootstrapSummary& summary, std::uint64_t seed, const std::filesystem::path& path);

}  // namespace lwgan

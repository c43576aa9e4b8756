#include "lwgan/dimsel.hpp"

#include "lwgan/datasets.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lwgan {

RankScoreTable make_score_table(std::vector<double> v_hat, std::vector<double> recon, double lambda) {
    if (v_hat.empty()) throw std::invalid_argument("make_score_table: no ranks");
    if (!recon.empty() && recon.size() != v_hat.size())
        throw std::invalid_argument("make_score_table: recon and V_hat differ in length");
    RankScoreTable table;
    table.rho_hat = rank_score(v_hat, lambda);
    table.r_hat = smallest_argmin(table.rho_hat);
    table.v_hat = std::move(v_hat);
    table.recon = std::move(recon);
    table.lambda = lambda;
    return table;
}

RankScoreTable estimate_rank(const LwganModel& model, const Matrix& data, double lambda, std::uint64_t eval_seed) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("estimate_rank: lambda must be >= 0");
    if (data.cols() != model.p) throw std::invalid_argument("estimate_rank: data width does not match model");
    if (data.rows() < 1) throw std::invalid_argument("estimate_rank: empty data");
    const Rng eval = Rng(eval_seed).split(streams::kEval);
    std::vector<double> v_hat;
    std::vector<double> recon;
    for (Index s = 1; s <= model.d; ++s) {
        Rng rng = eval.split(static_cast<std::uint64_t>(s));
        const Matrix z0 = sample_normal(rng, data.rows(), model.d);
        const LossBreakdown loss = empirical_loss(model, data, z0, s);
        if (!std::isfinite(loss.total))
            throw std::domain_error("estimate_rank: non-finite V_hat at s = " + std::to_string(s));
        v_hat.push_back(loss.total);
        recon.push_back(loss.reconstruction);
    }
    return make_score_table(std::move(v_hat), std::move(recon), lambda);
}

void LambdaConfig::validate() const {
    if (iterations < 0) throw std::invalid_argument("select_lambda: iterations must be >= 0");
    if (subsets < 2) throw std::invalid_argument("select_lambda: need at least 2 subsets for a standard error");
    if (!(subset_fraction > 0.0 && subset_fraction <= 1.0))
        throw std::invalid_argument("select_lambda: subset_fraction must lie in (0, 1]");
    if (!(lambda_min >= 0.0)) throw std::invalid_argument("select_lambda: lambda_min must be >= 0");
    if (!(exponent > 0.0)) throw std::invalid_argument("select_lambda: exponent must be > 0");
}

LambdaSelection lambda_from_scores(const Matrix& v_hat, double lambda_min, double exponent) {
    if (v_hat.rows() < 2) throw std::invalid_argument("lambda_from_scores: need at least 2 subsets");
    if (v_hat.cols() < 1) throw std::invalid_argument("lambda_from_scores: need at least one rank");
    if (!v_hat.allFinite()) throw std::domain_error("lambda_from_scores: non-finite V_hat");
    LambdaSelection out;
    out.v_hat = v_hat;
    const auto k = static_cast<double>(v_hat.rows());
    for (Index s = 0; s < v_hat.cols(); ++s) out.column_means.push_back(v_hat.col(s).sum() / k);
    out.r_tilde = smallest_argmin(out.column_means);
    const Index c = out.r_tilde - 1;
    double ss = 0.0;
    for (Index i = 0; i < v_hat.rows(); ++i) {
        const double dev = v_hat(i, c) - out.column_means[static_cast<std::size_t>(c)];
        ss += dev * dev;
    }
    out.se = std::sqrt(ss / (k - 1.0));
    out.lambda = std::max(std::pow(out.se, exponent), lambda_min);
    return out;
}

namespace {

Matrix take_rows(const Matrix& data, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), data.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = data.row(rows[i]);
    return out;
}

/// Uniform subset without replacement, kept in original row order.
std::vector<Index> draw_subset(Index n, Index size, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < size; ++i) {
        const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(size));
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Fresh parameters for the same architecture.
LwganModel reinitialized(const LwganModel& model, std::uint64_t seed) {
    LwganModel out = model;
    const Rng base = Rng(seed).split(streams::kInit);
    if (out.encoder) {
        Rng rng = base.split(1);
        out.encoder->params = nn::mlp_init(out.encoder->spec, rng);
    }
    {
        Rng rng = base.split(2);
        out.generator.params = nn::mlp_init(out.generator.spec, rng);
    }
    if (out.critic) {
        Rng rng = base.split(3);
        out.critic->params = nn::mlp_init(out.critic->spec, rng);
    }
    return out;
}

}  // namespace

LambdaSelection select_lambda(const LwganModel& model, const Matrix& data, const LambdaConfig& config) {
    config.validate();
    const Index n = data.rows();
    const auto size = std::max<Index>(1, static_cast<Index>(std::llround(config.subset_fraction * static_cast<double>(n))));
    TrainConfig tune = config.train;
    tune.mode = model.kind;
    tune.iterations = config.iterations;
    tune.batch_size = std::min(tune.batch_size, size);
    tune.convergence_window = 0;

    const Rng root = Rng(config.seed).split(streams::kLambda);
    Matrix v_hat(config.subsets, model.d);
    for (int k = 0; k < config.subsets; ++k) {
        Rng rng = root.split(static_cast<std::uint64_t>(k));
        const Matrix subset = take_rows(data, draw_subset(n, size, rng));
        tune.seed = rng.next_u64();
        const TrainResult tuned = train(tune, subset, model);
        const RankScoreTable table = estimate_rank(tuned.model, subset, 0.0, rng.next_u64());
        for (Index s = 0; s < model.d; ++s) v_hat(k, s) = table.v_hat[static_cast<std::size_t>(s)];
    }
    return lambda_from_scores(v_hat, config.lambda_min, config.exponent);
}

void BootstrapConfig::validate() const {
    if (rounds < 0) throw std::invalid_argument("bootstrap: rounds must be >= 0");
    if (n_boot < 0) throw std::invalid_argument("bootstrap: n_boot must be >= 0");
}

Index BootstrapSummary::mode() const noexcept {
    Index best = 0;
    long count = 0;
    for (const auto& [rank, c] : frequency)
        if (c > count) {
            best = rank;
            count = c;
        }
    return best;
}

double BootstrapSummary::mass(Index rank) const noexcept {
    if (r_boot.empty()) return 0.0;
    const auto it = frequency.find(rank);
    return it == frequency.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(r_boot.size());
}

BootstrapSummary bootstrap_dimension(const LwganModel& model, Index r_hat, double lambda, Index n_original,
                                     const BootstrapConfig& config) {
    config.validate();
    const RankMask mask(model.d, r_hat);
    const Index n_boot = config.n_boot > 0 ? config.n_boot : n_original;
    if (config.rounds > 0 && n_boot < 1) throw std::invalid_argument("bootstrap: sample size must be >= 1");
    TrainConfig retrain = config.train;
    retrain.mode = model.kind;
    retrain.batch_size = std::min(retrain.batch_size, std::max<Index>(n_boot, 1));

    const Rng root = Rng(config.seed).split(streams::kBootstrap);
    BootstrapSummary summary;
    for (long b = 0; b < config.rounds; ++b) {
        Rng rng = root.split(static_cast<std::uint64_t>(b));
        const Matrix simulated = generate(model, Tensor(sample_latent(rng, n_boot, mask))).values();
        retrain.seed = rng.next_u64();
        const std::uint64_t init_seed = rng.next_u64();
        LwganModel start = config.warm_start ? model : reinitialized(model, init_seed);
        const TrainResult fitted = train(retrain, simulated, std::move(start));
        const RankScoreTable table = estimate_rank(fitted.model, simulated, lambda, rng.next_u64());
        summary.r_boot.push_back(table.r_hat);
        ++summary.frequency[table.r_hat];
    }
    return summary;
}

void write_score_csv(const RankScoreTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "s,V_hat,rho_hat,recon\n";
    for (Index s = 1; s <= table.dim(); ++s) {
        const auto i = static_cast<std::size_t>(s - 1);
        out << s << ',' << format_double(table.v_hat[i]) << ',' << format_double(table.rho_hat[i]) << ','
            << format_double(i < table.recon.size() ? table.recon[i] : 0.0) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_bootstrap_csv(const BootstrapSummary& summary, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "round,r_boot\n";
    for (std::size_t b = 0; b < summary.r_boot.size(); ++b) out << (b + 1) << ',' << summary.r_boot[b] << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_bootstrap_json(const BootstrapSummary& summary, std::uint64_t seed, const std::filesystem::path& path) {
    nlohmann::json j;
    j["rounds"] = summary.rounds();
    j["seed"] = seed;
    j["mode"] = summary.mode();
    nlohmann::json freq = nlohmann::json::object();
    for (const auto& [rank, count] : summary.frequency) freq[std::to_string(rank)] = count;
    j["frequency"] = freq;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace lwgan

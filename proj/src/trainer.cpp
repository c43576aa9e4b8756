#include "lwgan/trainer.hpp"

#include "lwgan/datasets.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace lwgan {

using ad::Tensor;
using json = nlohmann::json;

void TrainConfig::validate() const {
    if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (critic_steps < 1) throw std::invalid_argument("TrainConfig: critic_steps must be >= 1");
    if (!(lambda_gp >= 0.0)) throw std::invalid_argument("TrainConfig: lambda_gp must be >= 0");
    if (convergence_window < 0) throw std::invalid_argument("TrainConfig: convergence_window must be >= 0");
    if (!(wae_lambda >= 0.0)) throw std::invalid_argument("TrainConfig: wae_lambda must be >= 0");
    for (const nn::AdamConfig* a : {&critic_adam, &gq_adam}) {
        if (!(a->lr > 0.0) || !(a->beta1 >= 0.0 && a->beta1 < 1.0) || !(a->beta2 >= 0.0 && a->beta2 < 1.0) ||
            !(a->eps > 0.0))
            throw std::invalid_argument("TrainConfig: invalid Adam settings");
    }
}

TrainingDiverged::TrainingDiverged(long iteration, const std::string& what)
    : std::runtime_error("training diverged at iteration " + std::to_string(iteration) + ": " + what),
      iteration_(iteration) {}

bool plateaued(const std::vector<IterationRecord>& records, long window, double tol) {
    if (window <= 0) return false;
    const auto w = static_cast<std::size_t>(window);
    if (records.size() < 2 * w) return false;
    double recent = 0.0;
    double before = 0.0;
    const std::size_t end = records.size();
    for (std::size_t i = end - w; i < end; ++i) recent += records[i].total;
    for (std::size_t i = end - 2 * w; i < end - w; ++i) before += records[i].total;
    recent /= static_cast<double>(w);
    before /= static_cast<double>(w);
    return std::abs(recent - before) < tol * std::abs(before);
}

namespace {

Matrix sample_rows(const Matrix& data, Index count, Rng& rng) {
    Matrix out(count, data.cols());
    for (Index i = 0; i < count; ++i)
        out.row(i) = data.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(data.rows()))));
    return out;
}

Matrix sample_uniform_column(Index count, Rng& rng) {
    Matrix eps(count, 1);
    for (Index i = 0; i < count; ++i) eps(i, 0) = rng.uniform();
    return eps;
}

std::vector<Tensor> concat(std::vector<Tensor> a, const std::vector<Tensor>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

void require_finite(double value, long iter, const char* what) {
    if (!std::isfinite(value)) throw TrainingDiverged(iter, std::string("non-finite ") + what);
}

void check_inputs(const TrainConfig& config, const Matrix& data, const LwganModel& model, ModelKind expected) {
    config.validate();
    model.validate();
    if (model.kind != expected)
        throw std::invalid_argument("train: model kind " + std::string(to_string(model.kind)) + " does not match " +
                                    std::string(to_string(expected)));
    if (data.cols() != model.p)
        throw std::invalid_argument("train: data has " + std::to_string(data.cols()) + " columns, model expects " +
                                    std::to_string(model.p));
    if (data.rows() < config.batch_size)
        throw std::invalid_argument("train: n = " + std::to_string(data.rows()) + " is smaller than batch size " +
                                    std::to_string(config.batch_size));
    if (!data.allFinite()) throw std::invalid_argument("train: data contains non-finite values");
}

/// Applies an Adam step and converts a non-finite gradient into a divergence
/// error for the current iteration.
void guarded_step(nn::AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads, long iter) {
    try {
        nn::adam_step(state, params, grads, false);
    } catch (const std::domain_error& e) {
        throw TrainingDiverged(iter, e.what());
    }
}

std::vector<Tensor*> param_ptrs(std::initializer_list<nn::MlpParams*> groups) {
    std::vector<Tensor*> out;
    for (nn::MlpParams* g : groups)
        for (Tensor& t : g->tensors) out.push_back(&t);
    return out;
}

}  // namespace

double lwgan_critic_phase(LwganModel& model, nn::AdamState& opt, const Matrix& data, Index rank,
                          const TrainConfig& config, Rng& rng, long iter) try {
    Network& critic = *model.critic;
    const std::vector<Tensor*> ptrs = param_ptrs({&critic.params});
    const RankMask mask(model.d, rank);
    const Index m = config.batch_size;
    double gp = 0.0;
    for (int l = 0; l < config.critic_steps; ++l) {
        const Matrix x = sample_rows(data, m, rng);
        const Matrix z0 = sample_normal(rng, m, model.d);
        const Matrix eps = sample_uniform_column(m, rng);

        // G and Q are frozen during the critic phase.
        const Tensor recon_x = generate(model, encode(model, Tensor(x), rank));
        const Tensor gen_x = generate(model, apply_mask(mask, Tensor(z0)));

        ad::Graph graph;
        const std::vector<Tensor> bound = nn::bind(graph, critic.params);
        const NetView f{critic.spec, bound};
        const Tensor gap = ad::sub(ad::mean(criticize(f, recon_x, mask)), ad::mean(criticize(f, gen_x, mask)));
        const Tensor penalty = gradient_penalty(graph, f, x, gen_x.values(), eps, mask);
        // Ascend the gap while descending the penalty.
        const Tensor loss = ad::sub(ad::scale(penalty, config.lambda_gp), gap);
        require_finite(loss.item(), iter, "critic loss");
        guarded_step(opt, ptrs, graph.grad(loss, bound), iter);
        gp = penalty.item();
    }
    return gp;
} catch (const std::domain_error& e) {
    throw TrainingDiverged(iter, e.what());
}

double wgan_critic_phase(LwganModel& model, nn::AdamState& opt, const Matrix& data, const TrainConfig& config,
                         Rng& rng, long iter) try {
    Network& critic = *model.critic;
    const std::vector<Tensor*> ptrs = param_ptrs({&critic.params});
    const RankMask full(model.d, model.d);
    const Index m = config.batch_size;
    double gp = 0.0;
    for (int l = 0; l < config.critic_steps; ++l) {
        const Matrix x = sample_rows(data, m, rng);
        const Matrix z = sample_normal(rng, m, model.d);
        const Matrix eps = sample_uniform_column(m, rng);
        const Tensor gen_x = generate(model, Tensor(z));

        ad::Graph graph;
        const std::vector<Tensor> bound = nn::bind(graph, critic.params);
        const NetView f{critic.spec, bound};
        const Tensor gap =
            ad::sub(ad::mean(criticize(f, Tensor(x), full, false)), ad::mean(criticize(f, gen_x, full, false)));
        const Tensor penalty = gradient_penalty(graph, f, x, gen_x.values(), eps, full, false);
        const Tensor loss = ad::sub(ad::scale(penalty, config.lambda_gp), gap);
        require_finite(loss.item(), iter, "critic loss");
        guarded_step(opt, ptrs, graph.grad(loss, bound), iter);
        gp = penalty.item();
    }
    return gp;
} catch (const std::domain_error& e) {
    throw TrainingDiverged(iter, e.what());
}

TrainResult train_lwgan(const TrainConfig& config, const Matrix& data, LwganModel model) {
    check_inputs(config, data, model, ModelKind::Lwgan);
    Rng rng = Rng(config.seed).split(streams::kTrain);
    Network& encoder = *model.encoder;
    Network& generator = model.generator;
    Network& critic = *model.critic;

    nn::AdamState critic_opt = nn::adam_init(config.critic_adam, critic.params);
    const nn::MlpParams* gq_groups[] = {&encoder.params, &generator.params};
    nn::AdamState gq_opt = nn::adam_init(config.gq_adam, gq_groups);
    const std::vector<Tensor*> gq_ptrs = param_ptrs({&encoder.params, &generator.params});

    const Index m = config.batch_size;
    TrainHistory history;
    for (long k = 1; k <= config.iterations; ++k) {
        const Index s = static_cast<Index>(rng.below(static_cast<std::uint64_t>(model.d))) + 1;
        const RankMask mask(model.d, s);
        IterationRecord rec;
        rec.iter = k;
        rec.rank = s;

        rec.gp = lwgan_critic_phase(model, critic_opt, data, s, config, rng, k);

        const Matrix x = sample_rows(data, m, rng);
        const Matrix z0 = sample_normal(rng, m, model.d);
        {
            ad::Graph graph;
            const std::vector<Tensor> enc = nn::bind(graph, encoder.params);
            const std::vector<Tensor> gen = nn::bind(graph, generator.params);
            const ModelView mv{NetView{encoder.spec, enc}, NetView{generator.spec, gen}, lwgan::view(critic), true};
            const LossTerms terms = empirical_terms(mv, Tensor(x), Tensor(z0), mask);
            rec.total = terms.total.item();
            rec.recon = terms.reconstruction.item();
            rec.critic_gap_pre = terms.critic_gap.item();
            require_finite(rec.total, k, "empirical loss");
            const std::vector<Tensor> grads = graph.grad(terms.total, concat(enc, gen));
            guarded_step(gq_opt, gq_ptrs, grads, k);
        }
        rec.critic_gap_post = empirical_terms(view(model), Tensor(x), Tensor(z0), mask).critic_gap.item();

        history.records.push_back(rec);
        if (k % std::max<long>(config.convergence_window, 1) == 0 &&
            plateaued(history.records, config.convergence_window, config.convergence_tol)) {
            history.converged = true;
            break;
        }
    }
    return {std::move(model), std::move(history)};
}

TrainResult train_wgan(const TrainConfig& config, const Matrix& data, LwganModel model) {
    check_inputs(config, data, model, ModelKind::Wgan);
    Rng rng = Rng(config.seed).split(streams::kTrain);
    Network& generator = model.generator;
    Network& critic = *model.critic;
    const RankMask full(model.d, model.d);

    nn::AdamState critic_opt = nn::adam_init(config.critic_adam, critic.params);
    nn::AdamState gen_opt = nn::adam_init(config.gq_adam, generator.params);
    const std::vector<Tensor*> gen_ptrs = param_ptrs({&generator.params});

    const Index m = config.batch_size;
    TrainHistory history;
    for (long k = 1; k <= config.iterations; ++k) {
        IterationRecord rec;
        rec.iter = k;
        rec.rank = model.d;

        rec.gp = wgan_critic_phase(model, critic_opt, data, config, rng, k);

        const Matrix x = sample_rows(data, m, rng);
        const Matrix z = sample_normal(rng, m, model.d);
        const double real_mean = criticize(model, Tensor(x), model.d).values().mean();
        {
            ad::Graph graph;
            const std::vector<Tensor> gen = nn::bind(graph, generator.params);
            const Tensor fake = ad::mean(criticize(lwgan::view(critic), generate(NetView{generator.spec, gen}, Tensor(z)),
                                                   full, false));
            rec.critic_gap_pre = real_mean - fake.item();
            rec.total = rec.critic_gap_pre;
            require_finite(rec.total, k, "critic gap");
            // The generator only influences the second expectation.
            guarded_step(gen_opt, gen_ptrs, graph.grad(ad::scale(fake, -1.0), gen), k);
        }
        rec.critic_gap_post = real_mean - criticize(model, generate(model, Tensor(z)), model.d).values().mean();

        history.records.push_back(rec);
        if (k % std::max<long>(config.convergence_window, 1) == 0 &&
            plateaued(history.records, config.convergence_window, config.convergence_tol)) {
            history.converged = true;
            break;
        }
    }
    return {std::move(model), std::move(history)};
}

double median_pairwise_distance(const Matrix& a, const Matrix& b) {
    Matrix pooled(a.rows() + b.rows(), a.cols());
    pooled << a, b;
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(pooled.rows() * (pooled.rows() - 1) / 2));
    for (Index i = 0; i < pooled.rows(); ++i)
        for (Index j = i + 1; j < pooled.rows(); ++j) dists.push_back((pooled.row(i) - pooled.row(j)).norm());
    if (dists.empty()) return 1.0;
    auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
    std::nth_element(dists.begin(), mid, dists.end());
    return *mid;
}

namespace {

/// Gram matrix of exp(-||a_i - b_j||^2 / (2 h^2)).
Tensor gaussian_gram(const Tensor& a, const Tensor& b, double bandwidth) {
    const Tensor one = Tensor::full(1, 1, 1.0);
    const Tensor a_sq = ad::broadcast_cols(ad::sum_cols(ad::square(a)), b.rows());
    const Tensor b_sq = ad::broadcast_rows(ad::matmul(one, ad::sum_cols(ad::square(b)), false, true), a.rows());
    const Tensor cross = ad::matmul(a, b, false, true);
    const Tensor sq = ad::sub(ad::add(a_sq, b_sq), ad::scale(cross, 2.0));
    return ad::exp(ad::scale(sq, -1.0 / (2.0 * bandwidth * bandwidth)));
}

}  // namespace

Tensor mmd_gaussian(const Tensor& q, const Matrix& z, double bandwidth) {
    if (q.rows() != z.rows() || q.cols() != z.cols())
        throw ad::ShapeError("mmd_gaussian: samples differ in shape");
    if (q.rows() < 2) throw std::invalid_argument("mmd_gaussian: need at least two rows");
    const Tensor zt(z);
    const auto n = static_cast<double>(q.rows());
    // Off-diagonal means; the diagonal of a Gaussian Gram matrix is exactly n ones.
    const Tensor qq = ad::scale(ad::affine(ad::sum(gaussian_gram(q, q, bandwidth)), 1.0, -n), 1.0 / (n * (n - 1.0)));
    const Tensor zz = ad::scale(ad::affine(ad::sum(gaussian_gram(zt, zt, bandwidth)), 1.0, -n), 1.0 / (n * (n - 1.0)));
    const Tensor qz = ad::scale(ad::sum(gaussian_gram(q, zt, bandwidth)), 2.0 / (n * n));
    return ad::sub(ad::add(qq, zz), qz);
}

TrainResult train_wae(const TrainConfig& config, const Matrix& data, LwganModel model) {
    check_inputs(config, data, model, ModelKind::Wae);
    Rng rng = Rng(config.seed).split(streams::kTrain);
    Network& encoder = *model.encoder;
    Network& generator = model.generator;
    const RankMask full(model.d, model.d);

    const nn::MlpParams* groups[] = {&encoder.params, &generator.params};
    nn::AdamState opt = nn::adam_init(config.gq_adam, groups);
    const std::vector<Tensor*> ptrs = param_ptrs({&encoder.params, &generator.params});

    const Index m = config.batch_size;
    TrainHistory history;
    for (long k = 1; k <= config.iterations; ++k) {
        IterationRecord rec;
        rec.iter = k;
        rec.rank = model.d;
        const Matrix x = sample_rows(data, m, rng);
        const Matrix z = sample_normal(rng, m, model.d);
        {
            ad::Graph graph;
            const std::vector<Tensor> enc = nn::bind(graph, encoder.params);
            const std::vector<Tensor> gen = nn::bind(graph, generator.params);
            const Tensor codes = encode(NetView{encoder.spec, enc}, Tensor(x), full, false);
            const Tensor recon =
                ad::mean(ad::row_norm(ad::sub(Tensor(x), generate(NetView{generator.spec, gen}, codes))));
            const double bandwidth = std::max(median_pairwise_distance(codes.values(), z), 1e-12);
            const Tensor mmd = mmd_gaussian(codes, z, bandwidth);
            const Tensor loss = ad::add(recon, ad::scale(mmd, config.wae_lambda));
            rec.recon = recon.item();
            rec.critic_gap_pre = mmd.item();
            rec.total = loss.item();
            require_finite(rec.total, k, "WAE loss");
            guarded_step(opt, ptrs, graph.grad(loss, concat(enc, gen)), k);
        }
        {
            const Tensor codes = encode(model, Tensor(x), model.d);
            const double bandwidth = std::max(median_pairwise_distance(codes.values(), z), 1e-12);
            rec.critic_gap_post = mmd_gaussian(codes, z, bandwidth).item();
        }

        history.records.push_back(rec);
        if (k % std::max<long>(config.convergence_window, 1) == 0 &&
            plateaued(history.records, config.convergence_window, config.convergence_tol)) {
            history.converged = true;
            break;
        }
    }
    return {std::move(model), std::move(history)};
}

TrainResult train(const TrainConfig& config, const Matrix& data, LwganModel model) {
    switch (config.mode) {
        case ModelKind::Lwgan: return train_lwgan(config, data, std::move(model));
        case ModelKind::Wgan: return train_wgan(config, data, std::move(model));
        case ModelKind::Wae: return train_wae(config, data, std::move(model));
    }
    throw std::invalid_argument("train: unknown mode");
}

void write_metrics_csv(const TrainHistory& history, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "iter,rank_s,critic_gap_pre,critic_gap_post,recon,gp\n";
    for (const IterationRecord& r : history.records) {
        out << r.iter << ',' << r.rank << ',' << format_double(r.critic_gap_pre) << ','
            << format_double(r.critic_gap_post) << ',' << format_double(r.recon) << ',' << format_double(r.gp)
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

TrainHistory read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "iter,rank_s,critic_gap_pre,critic_gap_post,recon,gp")
        throw std::runtime_error(path.string() + ": not a metrics file");
    TrainHistory history;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<double, 6> v{};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t f = 0; f < v.size(); ++f) {
            const auto res = std::from_chars(p, end, v[f]);
            if (res.ec != std::errc{} || (f + 1 < v.size() ? (res.ptr == end || *res.ptr != ',') : res.ptr != end))
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed row");
            p = res.ptr + 1;
        }
        IterationRecord r;
        r.iter = static_cast<long>(v[0]);
        r.rank = static_cast<Index>(v[1]);
        r.critic_gap_pre = v[2];
        r.critic_gap_post = v[3];
        r.recon = v[4];
        r.gp = v[5];
        history.records.push_back(r);
    }
    return history;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json network_to_json(const Network& net) {
    json spec;
    spec["widths"] = net.spec.widths;
    json acts = json::array();
    for (nn::Activation a : net.spec.activations) acts.push_back(std::string(nn::to_string(a)));
    spec["activations"] = acts;
    spec["leaky_alpha"] = net.spec.leaky_alpha;

    json params = json::array();
    for (std::size_t i = 0; i < net.params.count(); ++i) {
        const Matrix& v = net.params.tensors[i].values();
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(v.size()));
        for (Index r = 0; r < v.rows(); ++r)
            for (Index c = 0; c < v.cols(); ++c) flat.push_back(v(r, c));
        params.push_back({{"name", nn::param_name(i)}, {"shape", {v.rows(), v.cols()}}, {"values", flat}});
    }
    return {{"spec", spec}, {"params", params}};
}

Network network_from_json(const json& j, const std::string& section) {
    Network net;
    const json& spec = j.at("spec");
    net.spec.widths = spec.at("widths").get<std::vector<Index>>();
    for (const json& a : spec.at("activations")) net.spec.activations.push_back(nn::activation_from_string(a.get<std::string>()));
    net.spec.leaky_alpha = spec.at("leaky_alpha").get<double>();
    net.spec.validate();

    const json& params = j.at("params");
    if (params.size() != 2 * net.spec.layers())
        throw CheckpointError(section + ": expected " + std::to_string(2 * net.spec.layers()) + " parameter arrays");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const json& pj = params[i];
        const auto shape = pj.at("shape").get<std::vector<Index>>();
        const auto values = pj.at("values").get<std::vector<double>>();
        const std::size_t layer = i / 2;
        const Index rows = i % 2 == 0 ? net.spec.widths[layer + 1] : 1;
        const Index cols = i % 2 == 0 ? net.spec.widths[layer] : net.spec.widths[layer + 1];
        if (shape.size() != 2 || shape[0] != rows || shape[1] != cols ||
            values.size() != static_cast<std::size_t>(rows * cols))
            throw CheckpointError(section + "." + nn::param_name(i) + ": shape does not match spec");
        Matrix m(rows, cols);
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
        net.params.tensors.emplace_back(std::move(m));
    }
    return net;
}

}  // namespace

void save_checkpoint(const LwganModel& model, const std::filesystem::path& path) {
    json j;
    j["format"] = "lwgan-checkpoint";
    j["version"] = kCheckpointVersion;
    j["mode"] = std::string(to_string(model.kind));
    j["p"] = model.p;
    j["d"] = model.d;
    if (model.encoder) j["encoder"] = network_to_json(*model.encoder);
    j["generator"] = network_to_json(model.generator);
    if (model.critic) j["critic"] = network_to_json(*model.critic);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
    out << j.dump() << '\n';
    if (!out) throw CheckpointError("write failed for " + path.string());
}

LwganModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw CheckpointError(path.string() + ": malformed checkpoint: " + e.what());
    }
    try {
        if (j.value("format", "") != "lwgan-checkpoint") throw CheckpointError(path.string() + ": not a checkpoint");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
        LwganModel model;
        model.kind = model_kind_from_string(j.at("mode").get<std::string>());
        model.p = j.at("p").get<Index>();
        model.d = j.at("d").get<Index>();
        if (j.contains("encoder")) model.encoder = network_from_json(j.at("encoder"), "encoder");
        model.generator = network_from_json(j.at("generator"), "generator");
        if (j.contains("critic")) model.critic = network_from_json(j.at("critic"), "critic");
        model.validate();
        return model;
    } catch (const CheckpointError&) {
        throw;
    } catch (const std::exception& e) {
        throw CheckpointError(path.string() + ": malformed checkpoint: " + e.what());
    }
}

}  // namespace lwgan

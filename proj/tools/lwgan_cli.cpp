#include "lwgan/datasets.hpp"
#include "lwgan/dimsel.hpp"
#include "lwgan/plot.hpp"
#include "lwgan/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lwgan;

namespace {

/// Bad flags, config keys or values. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainSettings {
    TrainConfig train;
    Index latent_dim = 0;  // 0 picks the default for the data width
    bool standardize = false;
    bool seed_set = false;
};

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    if constexpr (std::is_same_v<T, bool>) {
        if (text == "true") return true;
        if (text == "false") return false;
        throw UsageError("config key '" + key + "': expected true or false, got '" + text + "'");
    } else {
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
            throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
        return value;
    }
}

void apply_adam_key(nn::AdamConfig& adam, const std::string& path, const std::string& name, const std::string& v) {
    if (name == "lr") adam.lr = parse_value<double>(path, v);
    else if (name == "beta1") adam.beta1 = parse_value<double>(path, v);
    else if (name == "beta2") adam.beta2 = parse_value<double>(path, v);
    else if (name == "eps") adam.eps = parse_value<double>(path, v);
    else throw UsageError("unknown config key '" + path + "'");
}

void apply_train_key(TrainSettings& s, const std::string& path, const std::string& name, const std::string& v) {
    TrainConfig& c = s.train;
    if (name == "mode") {
        try {
            c.mode = model_kind_from_string(v);
        } catch (const std::invalid_argument& e) {
            throw UsageError("config key '" + path + "': " + e.what());
        }
    } else if (name == "iterations") c.iterations = parse_value<long>(path, v);
    else if (name == "batch_size") c.batch_size = parse_value<Index>(path, v);
    else if (name == "critic_steps") c.critic_steps = parse_value<int>(path, v);
    else if (name == "lambda_gp") c.lambda_gp = parse_value<double>(path, v);
    else if (name == "seed") {
        c.seed = parse_value<std::uint64_t>(path, v);
        s.seed_set = true;
    } else if (name == "convergence_window") c.convergence_window = parse_value<long>(path, v);
    else if (name == "convergence_tol") c.convergence_tol = parse_value<double>(path, v);
    else if (name == "wae_lambda") c.wae_lambda = parse_value<double>(path, v);
    else if (name == "latent_dim") s.latent_dim = parse_value<Index>(path, v);
    else if (name == "standardize") s.standardize = parse_value<bool>(path, v);
    else if (name == "lr") {
        c.critic_adam.lr = parse_value<double>(path, v);
        c.gq_adam.lr = c.critic_adam.lr;
    } else throw UsageError("unknown config key '" + path + "'");
}

/// Sectioned key = value file: top-level keys or [train] set training fields,
/// [adam.critic] and [adam.gq] set optimizer fields.
void apply_config_file(TrainSettings& s, const fs::path& file) {
    if (!fs::exists(file)) throw UsageError("config file " + file.string() + " does not exist");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(file.string());
    } catch (const std::exception& e) {
        throw UsageError("config file " + file.string() + ": " + e.what());
    }
    for (const CLI::ConfigItem& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        std::string section;
        for (const std::string& p : item.parents) section += (section.empty() ? "" : ".") + p;
        const std::string path = section.empty() ? item.name : section + "." + item.name;
        if (item.inputs.size() != 1) throw UsageError("config key '" + path + "': expected a single value");
        const std::string& value = item.inputs.front();
        if (section.empty() || section == "train") apply_train_key(s, path, item.name, value);
        else if (section == "adam.critic") apply_adam_key(s.train.critic_adam, path, item.name, value);
        else if (section == "adam.gq") apply_adam_key(s.train.gq_adam, path, item.name, value);
        else throw UsageError("unknown config section '[" + section + "]' at key '" + path + "'");
    }
}

json adam_json(const nn::AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

nn::AdamConfig adam_from_json(const json& j) {
    nn::AdamConfig a;
    a.lr = j.at("lr").get<double>();
    a.beta1 = j.at("beta1").get<double>();
    a.beta2 = j.at("beta2").get<double>();
    a.eps = j.at("eps").get<double>();
    return a;
}

json train_json(const TrainConfig& c) {
    return {{"mode", std::string(to_string(c.mode))},
            {"iterations", c.iterations},
            {"batch_size", c.batch_size},
            {"critic_steps", c.critic_steps},
            {"lambda_gp", c.lambda_gp},
            {"seed", c.seed},
            {"convergence_window", c.convergence_window},
            {"convergence_tol", c.convergence_tol},
            {"wae_lambda", c.wae_lambda},
            {"adam_critic", adam_json(c.critic_adam)},
            {"adam_gq", adam_json(c.gq_adam)}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig c;
    c.mode = model_kind_from_string(j.at("mode").get<std::string>());
    c.iterations = j.at("iterations").get<long>();
    c.batch_size = j.at("batch_size").get<Index>();
    c.critic_steps = j.at("critic_steps").get<int>();
    c.lambda_gp = j.at("lambda_gp").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.convergence_window = j.at("convergence_window").get<long>();
    c.convergence_tol = j.at("convergence_tol").get<double>();
    c.wae_lambda = j.at("wae_lambda").get<double>();
    c.critic_adam = adam_from_json(j.at("adam_critic"));
    c.gq_adam = adam_from_json(j.at("adam_gq"));
    return c;
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_json(const json& j, const fs::path& path) { plot::write_text(path, j.dump(2) + "\n"); }

Matrix row_matrix(const std::vector<double>& v) {
    Matrix m(1, static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Index>(i)) = v[i];
    return m;
}

std::vector<double> row_vector(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

/// Default latent width: the toy setting for a matching ambient width, else p.
Index default_latent_dim(Index p) {
    switch (p) {
        case 2: return toy_latent_dim(ToyDataset::SwissRoll);
        case 3: return toy_latent_dim(ToyDataset::SCurve);
        case 5: return toy_latent_dim(ToyDataset::Hyperplane);
        default: return p;
    }
}

/// Loads the data a run was trained on and applies its standardization.
Dataset load_run_data(const fs::path& data_path, const std::optional<json>& run) {
    Dataset data = load_csv(data_path);
    if (run && run->contains("standardization")) {
        const json& st = run->at("standardization");
        const Matrix mean = row_matrix(st.at("mean").get<std::vector<double>>());
        const Matrix scale = row_matrix(st.at("scale").get<std::vector<double>>());
        if (mean.cols() != data.p()) throw std::runtime_error("standardization width does not match data");
        data.rows = ((data.rows.rowwise() - mean.row(0)).array().rowwise() / scale.row(0).array()).matrix();
    }
    return data;
}

std::optional<json> run_json_near(const fs::path& checkpoint) {
    const fs::path candidate = checkpoint.parent_path() / "run.json";
    if (fs::exists(candidate)) return read_json(candidate);
    return std::nullopt;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& name, Index n, std::uint64_t seed, const fs::path& out) {
    const Dataset data = generate_dataset(name, n, seed);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_csv(data, out);
    std::cout << "wrote " << data.n() << " rows, " << data.p() << " columns to " << out.string() << '\n';
    return 0;
}

int cmd_train(TrainSettings s, fs::path data_path, const fs::path& out_dir) {
    Dataset data = load_csv(data_path);
    const Index d = s.latent_dim > 0 ? s.latent_dim : default_latent_dim(data.p());
    std::optional<Standardization> st;
    if (s.standardize) st = standardize(data);

    LwganModel model = make_model(s.train.mode, data.p(), d, s.train.seed);
    fs::create_directories(out_dir);
    json run;
    run["command"] = "train";
    run["data"] = fs::absolute(data_path).lexically_normal().string();
    run["n"] = data.n();
    run["p"] = data.p();
    run["latent_dim"] = d;
    run["standardize"] = s.standardize;
    if (st) run["standardization"] = {{"mean", row_vector(st->mean)}, {"scale", row_vector(st->scale)}};
    run["train"] = train_json(s.train);
    write_json(run, out_dir / "run.json");

    const TrainResult result = train(s.train, data.rows, std::move(model));
    save_checkpoint(result.model, out_dir / "checkpoint.json");
    write_metrics_csv(result.history, out_dir / "metrics.csv");
    run["iterations_run"] = result.history.records.size();
    run["converged"] = result.history.converged;
    write_json(run, out_dir / "run.json");
    std::cout << "trained " << to_string(s.train.mode) << " for " << result.history.records.size()
              << " iterations" << (result.history.converged ? " (converged)" : "") << "; outputs in "
              << out_dir.string() << '\n';
    return 0;
}

struct RankScoreArgs {
    fs::path checkpoint;
    fs::path data;
    std::string lambda = "auto";
    fs::path out;
    std::optional<std::uint64_t> seed;
    LambdaConfig tune;
};

int cmd_rank_scores(RankScoreArgs a) {
    const LwganModel model = load_checkpoint(a.checkpoint);
    if (model.kind != ModelKind::Lwgan) throw UsageError("rank-scores needs an lwgan checkpoint");
    const std::optional<json> run = run_json_near(a.checkpoint);
    const Dataset data = load_run_data(a.data, run);
    std::uint64_t seed = 0;
    if (a.seed) seed = *a.seed;
    else if (run) seed = run->at("train").at("seed").get<std::uint64_t>();

    json summary;
    double lambda = 0.0;
    if (a.lambda == "auto") {
        if (run) a.tune.train = train_from_json(run->at("train"));
        a.tune.seed = seed;
        const LambdaSelection sel = select_lambda(model, data.rows, a.tune);
        lambda = sel.lambda;
        summary["lambda_mode"] = "auto";
        summary["se"] = sel.se;
        summary["r_tilde"] = sel.r_tilde;
        summary["subset_column_means"] = sel.column_means;
        summary["subsets"] = a.tune.subsets;
        summary["tune_iterations"] = a.tune.iterations;
    } else {
        const auto res = std::from_chars(a.lambda.data(), a.lambda.data() + a.lambda.size(), lambda);
        if (res.ec != std::errc{} || res.ptr != a.lambda.data() + a.lambda.size() || !(lambda >= 0.0))
            throw UsageError("--lambda must be 'auto' or a non-negative number, got '" + a.lambda + "'");
        summary["lambda_mode"] = "fixed";
    }
    const RankScoreTable table = estimate_rank(model, data.rows, lambda, seed);
    fs::create_directories(a.out);
    write_score_csv(table, a.out / "rank_scores.csv");
    summary["lambda"] = lambda;
    summary["r_hat"] = table.r_hat;
    summary["seed"] = seed;
    summary["n"] = data.n();
    summary["checkpoint"] = fs::absolute(a.checkpoint).lexically_normal().string();
    write_json(summary, a.out / "rank_summary.json");
    plot::write_text(a.out / "rank_scores.svg", plot::scores_svg(table));
    std::cout << "r_hat = " << table.r_hat << " (lambda = " << format_double(lambda) << ")\n";
    return 0;
}

struct BootstrapArgs {
    fs::path checkpoint;
    fs::path summary;
    fs::path out;
    std::uint64_t seed = 0;
    long rounds = 100;
    long iterations = 200;
    Index n_boot = 0;
    bool cold_start = false;
};

int cmd_bootstrap(BootstrapArgs a) {
    const LwganModel model = load_checkpoint(a.checkpoint);
    if (model.kind != ModelKind::Lwgan) throw UsageError("bootstrap needs an lwgan checkpoint");
    const std::optional<json> run = run_json_near(a.checkpoint);
    const fs::path summary_path = a.summary.empty() ? a.checkpoint.parent_path() / "rank_summary.json" : a.summary;
    if (!fs::exists(summary_path))
        throw UsageError("rank summary " + summary_path.string() + " not found; run rank-scores first or pass --summary");
    const json summary = read_json(summary_path);

    BootstrapConfig config;
    config.rounds = a.rounds;
    config.n_boot = a.n_boot;
    config.warm_start = !a.cold_start;
    config.seed = a.seed;
    if (run) config.train = train_from_json(run->at("train"));
    config.train.iterations = a.iterations;
    config.train.convergence_window = 0;
    const BootstrapSummary result =
        bootstrap_dimension(model, summary.at("r_hat").get<Index>(), summary.at("lambda").get<double>(),
                            summary.at("n").get<Index>(), config);
    fs::create_directories(a.out);
    write_bootstrap_csv(result, a.out / "bootstrap.csv");
    write_bootstrap_json(result, a.seed, a.out / "bootstrap.json");
    std::cout << result.rounds() << " rounds";
    if (result.rounds() > 0) std::cout << ", mode " << result.mode() << " (" << 100.0 * result.mass(result.mode()) << "%)";
    std::cout << '\n';
    return 0;
}

RankScoreTable read_score_table(const fs::path& dir) {
    const json summary = read_json(dir / "rank_summary.json");
    std::ifstream in(dir / "rank_scores.csv", std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + (dir / "rank_scores.csv").string());
    std::string line;
    std::getline(in, line);
    std::vector<double> v_hat;
    std::vector<double> recon;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 4> f{};
        const char* p = line.data();
        const char* end = p + line.size();
        for (double& x : f) {
            const auto res = std::from_chars(p, end, x);
            if (res.ec != std::errc{}) throw std::runtime_error("malformed rank_scores.csv row: " + line);
            p = res.ptr == end ? end : res.ptr + 1;
        }
        v_hat.push_back(f[1]);
        recon.push_back(f[3]);
    }
    return make_score_table(std::move(v_hat), std::move(recon), summary.at("lambda").get<double>());
}

int cmd_plot(const fs::path& run_dir, const std::string& kind, fs::path out, Index max_points) {
    if (out.empty()) out = run_dir / (kind + ".svg");
    std::string svg;
    if (kind == "losses") {
        svg = plot::losses_svg(read_metrics_csv(run_dir / "metrics.csv"));
    } else if (kind == "scores") {
        svg = plot::scores_svg(read_score_table(run_dir));
    } else {
        const json run = read_json(run_dir / "run.json");
        const LwganModel model = load_checkpoint(run_dir / "checkpoint.json");
        Dataset data = load_run_data(run.at("data").get<std::string>(), run);
        const Index n = std::min(data.n(), max_points);
        const Matrix x = data.rows.topRows(n);
        Index rank = model.d;
        if (fs::exists(run_dir / "rank_summary.json")) rank = read_json(run_dir / "rank_summary.json").at("r_hat").get<Index>();
        Rng rng = Rng(run.at("train").at("seed").get<std::uint64_t>()).split(streams::kEval);
        const Matrix gen = generate(model, Tensor(sample_latent(rng, n, RankMask(model.d, rank)))).values();
        std::vector<plot::Series> clouds{{"data", x}, {"generated (s = " + std::to_string(rank) + ")", gen}};
        if (model.encoder) clouds.push_back({"reconstructed", generate(model, encode(model, Tensor(x), rank)).values()});
        svg = plot::scatter_svg(clouds);
    }
    plot::write_text(out, svg);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent-rank Wasserstein generative modelling and intrinsic-dimension estimation"};
    app.require_subcommand(1);

    std::string dataset;
    Index n = 10000;
    std::uint64_t data_seed = 0;
    fs::path data_out;
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic manifold dataset to CSV");
    gen->add_option("--dataset", dataset, "swiss_roll, s_curve or hyperplane")->required();
    gen->add_option("--n", n, "Number of rows")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--seed", data_seed, "Random seed")->required();
    gen->add_option("--out", data_out, "Output CSV path")->required();

    fs::path data_path;
    fs::path out_dir;
    fs::path config_path;
    fs::path from_run;
    std::string mode;
    std::uint64_t seed = 0;
    long iterations = 0;
    Index batch = 0;
    int critic_steps = 0;
    double lambda_gp = 0.0;
    double lr = 0.0;
    double critic_lr = 0.0;
    double gq_lr = 0.0;
    long window = 0;
    double tol = 0.0;
    double wae_lambda = 0.0;
    Index latent_dim = 0;
    bool standardize_flag = false;
    auto* tr = app.add_subcommand("train", "Train a model and write checkpoint.json, metrics.csv and run.json");
    auto* o_data = tr->add_option("--data", data_path, "Training data CSV");
    auto* o_config = tr->add_option("--config", config_path, "Sectioned key = value config file");
    auto* o_from = tr->add_option("--from-run", from_run, "Repeat the run recorded in a run.json");
    tr->add_option("--out-dir", out_dir, "Output directory")->required();
    auto* o_mode = tr->add_option("--mode", mode, "lwgan, wgan or wae");
    auto* o_seed = tr->add_option("--seed", seed, "Random seed (required here or in the config)");
    auto* o_iter = tr->add_option("--iterations", iterations, "Maximum outer iterations");
    auto* o_batch = tr->add_option("--batch-size", batch, "Minibatch size");
    auto* o_critic = tr->add_option("--critic-steps", critic_steps, "Critic steps per outer iteration");
    auto* o_gp = tr->add_option("--lambda-gp", lambda_gp, "Gradient-penalty weight");
    auto* o_lr = tr->add_option("--lr", lr, "Learning rate for every parameter group");
    auto* o_clr = tr->add_option("--critic-lr", critic_lr, "Critic learning rate");
    auto* o_glr = tr->add_option("--gq-lr", gq_lr, "Encoder/generator learning rate");
    auto* o_win = tr->add_option("--convergence-window", window, "Plateau window (0 disables)");
    auto* o_tol = tr->add_option("--convergence-tol", tol, "Relative plateau tolerance");
    auto* o_wae = tr->add_option("--wae-lambda", wae_lambda, "MMD weight for wae mode");
    auto* o_dim = tr->add_option("--latent-dim", latent_dim, "Latent width d");
    auto* o_std = tr->add_flag("--standardize", standardize_flag, "Standardize columns before training");
    for (CLI::Option* o : {o_data, o_config, o_mode, o_seed, o_iter, o_batch, o_critic, o_gp, o_lr, o_clr, o_glr,
                           o_win, o_tol, o_wae, o_dim, o_std})
        o_from->excludes(o);

    RankScoreArgs rs;
    std::uint64_t rs_seed = 0;
    auto* rank = app.add_subcommand("rank-scores", "Score every latent rank and pick the intrinsic dimension");
    rank->add_option("--checkpoint", rs.checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
    rank->add_option("--data", rs.data, "Data CSV the model was trained on")->required();
    rank->add_option("--lambda", rs.lambda, "'auto' or a non-negative penalty")->capture_default_str();
    rank->add_option("--out", rs.out, "Output directory")->required();
    auto* o_rs_seed = rank->add_option("--seed", rs_seed, "Evaluation seed (defaults to the training seed)");
    rank->add_option("--subsets", rs.tune.subsets, "Subsets for lambda selection")->capture_default_str();
    rank->add_option("--tune-iterations", rs.tune.iterations, "Fine-tuning iterations per subset")
        ->capture_default_str();
    rank->add_option("--subset-fraction", rs.tune.subset_fraction, "Subset size as a fraction of n")
        ->capture_default_str();

    BootstrapArgs bs;
    auto* boot = app.add_subcommand("bootstrap", "Bootstrap distribution of the estimated dimension");
    boot->add_option("--checkpoint", bs.checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
    boot->add_option("--rounds", bs.rounds, "Bootstrap rounds")->capture_default_str()->check(CLI::NonNegativeNumber);
    boot->add_option("--seed", bs.seed, "Random seed")->required();
    boot->add_option("--out", bs.out, "Output directory")->required();
    boot->add_option("--summary", bs.summary, "rank_summary.json (default: next to the checkpoint)");
    boot->add_option("--iterations", bs.iterations, "Retraining iterations per round")->capture_default_str();
    boot->add_option("--n-boot", bs.n_boot, "Simulated sample size (default: original n)");
    boot->add_flag("--cold-start", bs.cold_start, "Retrain from fresh parameters instead of the fitted ones");

    fs::path run_dir;
    std::string kind;
    fs::path plot_out;
    Index max_points = 2000;
    auto* pl = app.add_subcommand("plot", "Render an SVG from a run directory");
    pl->add_option("--run-dir", run_dir, "Directory written by train / rank-scores")->required()->check(CLI::ExistingDirectory);
    pl->add_option("--kind", kind, "scatter, scores or losses")
        ->required()
        ->check(CLI::IsMember({"scatter", "scores", "losses"}));
    pl->add_option("--out", plot_out, "Output SVG (default: <run-dir>/<kind>.svg)");
    pl->add_option("--max-points", max_points, "Points per cloud in scatter plots")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            try {
                (void)toy_dataset_from_string(dataset);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return cmd_gen_data(dataset, n, data_seed, data_out);
        }
        if (*tr) {
            TrainSettings s;
            if (!from_run.empty()) {
                const json run = read_json(from_run);
                s.train = train_from_json(run.at("train"));
                s.latent_dim = run.at("latent_dim").get<Index>();
                s.standardize = run.at("standardize").get<bool>();
                s.seed_set = true;
                data_path = run.at("data").get<std::string>();
            } else {
                if (data_path.empty()) throw UsageError("train: --data is required");
                if (!config_path.empty()) apply_config_file(s, config_path);
                if (o_mode->count()) {
                    try {
                        s.train.mode = model_kind_from_string(mode);
                    } catch (const std::invalid_argument& e) {
                        throw UsageError(e.what());
                    }
                }
                if (o_seed->count()) {
                    s.train.seed = seed;
                    s.seed_set = true;
                }
                if (o_iter->count()) s.train.iterations = iterations;
                if (o_batch->count()) s.train.batch_size = batch;
                if (o_critic->count()) s.train.critic_steps = critic_steps;
                if (o_gp->count()) s.train.lambda_gp = lambda_gp;
                if (o_lr->count()) s.train.critic_adam.lr = s.train.gq_adam.lr = lr;
                if (o_clr->count()) s.train.critic_adam.lr = critic_lr;
                if (o_glr->count()) s.train.gq_adam.lr = gq_lr;
                if (o_win->count()) s.train.convergence_window = window;
                if (o_tol->count()) s.train.convergence_tol = tol;
                if (o_wae->count()) s.train.wae_lambda = wae_lambda;
                if (o_dim->count()) s.latent_dim = latent_dim;
                if (o_std->count()) s.standardize = standardize_flag;
            }
            if (!s.seed_set) throw UsageError("train: a seed is required (--seed or 'seed' in the config)");
            try {
                s.train.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (s.latent_dim < 0) throw UsageError("train: latent_dim must be >= 1");
            return cmd_train(s, data_path, out_dir);
        }
        if (*rank) {
            if (o_rs_seed->count()) rs.seed = rs_seed;
            return cmd_rank_scores(rs);
        }
        if (*boot) return cmd_bootstrap(bs);
        if (*pl) return cmd_plot(run_dir, kind, plot_out, max_points);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

#include "doctest.h"

#include "lwgan/datasets.hpp"
#include "lwgan/trainer.hpp"

#include "small_model.hpp"
#include "support.hpp"

#include <cmath>
#include <fstream>

using namespace lwgan;
using testing::small_model;

namespace {

bool same_params(const LwganModel& a, const LwganModel& b) {
    auto eq = [](const Network& x, const Network& y) {
        if (!(x.spec == y.spec) || x.params.count() != y.params.count()) return false;
        for (std::size_t i = 0; i < x.params.count(); ++i)
            if (x.params.tensors[i].values() != y.params.tensors[i].values()) return false;
        return true;
    };
    if (a.kind != b.kind || a.p != b.p || a.d != b.d) return false;
    if (a.encoder.has_value() != b.encoder.has_value() || a.critic.has_value() != b.critic.has_value()) return false;
    if (a.encoder && !eq(*a.encoder, *b.encoder)) return false;
    if (a.critic && !eq(*a.critic, *b.critic)) return false;
    return eq(a.generator, b.generator);
}

TrainConfig quick_config(ModelKind mode, long iterations) {
    TrainConfig c;
    c.mode = mode;
    c.iterations = iterations;
    c.batch_size = 32;
    c.critic_steps = 2;
    c.seed = 11;
    c.convergence_window = 0;
    c.critic_adam.lr = 1e-3;
    c.gq_adam.lr = 1e-3;
    return c;
}

Matrix swiss(Index n, std::uint64_t seed) {
    Dataset d = generate_dataset("swiss_roll", n, seed);
    standardize(d);
    return d.rows;
}

}  // namespace

TEST_CASE("config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.iterations = 0;
    CHECK_NOTHROW(c.validate());
    c.iterations = -1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.critic_steps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.lambda_gp = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.gq_adam.beta2 = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.critic_adam.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero iterations return the initial parameters for every mode") {
    const Matrix data = swiss(64, 1);
    for (ModelKind kind : {ModelKind::Lwgan, ModelKind::Wgan, ModelKind::Wae}) {
        CAPTURE(to_string(kind));
        const LwganModel init = small_model(kind, 2, 3, 5);
        const TrainResult r = train(quick_config(kind, 0), data, init);
        CHECK(same_params(r.model, init));
        CHECK(r.history.records.empty());
        CHECK_FALSE(r.history.converged);
    }
}

TEST_CASE("history records every executed iteration") {
    const Matrix data = swiss(128, 2);
    const TrainResult r = train(quick_config(ModelKind::Lwgan, 12), data, small_model(ModelKind::Lwgan, 2, 3, 5));
    REQUIRE(r.history.records.size() == 12);
    for (std::size_t i = 0; i < r.history.records.size(); ++i) {
        const IterationRecord& rec = r.history.records[i];
        CHECK(rec.iter == static_cast<long>(i) + 1);
        CHECK(rec.rank >= 1);
        CHECK(rec.rank <= 3);
        CHECK(rec.recon >= 0.0);
        CHECK(rec.gp >= 0.0);
        CHECK(rec.total == doctest::Approx(rec.recon + rec.critic_gap_pre));
    }
    CHECK_FALSE(same_params(r.model, small_model(ModelKind::Lwgan, 2, 3, 5)));
}

TEST_CASE("rank draws are uniform over 1..d") {
    const Matrix data = swiss(64, 3);
    TrainConfig c = quick_config(ModelKind::Lwgan, 300);
    c.critic_steps = 1;
    c.batch_size = 8;
    const TrainResult r = train(c, data, small_model(ModelKind::Lwgan, 2, 3, 1, 4));
    std::array<int, 3> counts{};
    for (const IterationRecord& rec : r.history.records) ++counts[static_cast<std::size_t>(rec.rank - 1)];
    for (int k : counts) CHECK(std::abs(k - 100) < 30);
}

TEST_CASE("training is deterministic and the metrics file is byte-identical") {
    const Matrix data = swiss(128, 4);
    const TrainConfig c = quick_config(ModelKind::Lwgan, 10);
    const LwganModel init = small_model(ModelKind::Lwgan, 2, 3, 9);
    const TrainResult a = train(c, data, init);
    const TrainResult b = train(c, data, init);
    CHECK(same_params(a.model, b.model));

    testing::TempDir dir("trainer_det");
    write_metrics_csv(a.history, dir / "a.csv");
    write_metrics_csv(b.history, dir / "b.csv");
    CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));

    TrainConfig other = c;
    other.seed = 12;
    const TrainResult o = train(other, data, init);
    write_metrics_csv(o.history, dir / "o.csv");
    CHECK(testing::slurp(dir / "a.csv") != testing::slurp(dir / "o.csv"));
}

TEST_CASE("input errors") {
    const Matrix data = swiss(16, 5);
    const LwganModel model = small_model(ModelKind::Lwgan, 2, 3, 1);
    TrainConfig c = quick_config(ModelKind::Lwgan, 1);
    CHECK_THROWS_AS(train(c, data, model), std::invalid_argument);  // n = 16 < M = 32
    c.batch_size = 8;
    CHECK_NOTHROW(train(c, data, model));
    CHECK_THROWS_AS(train(c, Matrix::Zero(16, 3), model), std::invalid_argument);
    Matrix bad = data;
    bad(3, 1) = std::nan("");
    CHECK_THROWS_AS(train(c, bad, model), std::invalid_argument);
    c.mode = ModelKind::Wgan;
    CHECK_THROWS_AS(train(c, data, model), std::invalid_argument);
}

TEST_CASE("a runaway learning rate surfaces as divergence") {
    Matrix data = swiss(64, 6);
    data *= 1e150;
    TrainConfig c = quick_config(ModelKind::Lwgan, 50);
    c.batch_size = 16;
    c.critic_adam.lr = 1e150;
    c.gq_adam.lr = 1e150;
    try {
        (void)train(c, data, small_model(ModelKind::Lwgan, 2, 3, 1));
        FAIL("expected TrainingDiverged");
    } catch (const TrainingDiverged& e) {
        CHECK(e.iteration() >= 1);
        CHECK(e.iteration() <= 50);
        CHECK(std::string(e.what()).find("iteration") != std::string::npos);
    }
}

TEST_CASE("critic steps ascend the gap on frozen encoder and generator") {
    const Matrix data = swiss(2048, 7);
    LwganModel model = small_model(ModelKind::Lwgan, 2, 3, 21);
    const LwganModel frozen = model;
    TrainConfig c = quick_config(ModelKind::Lwgan, 0);
    c.batch_size = 128;
    c.critic_steps = 5;
    c.critic_adam = nn::AdamConfig{};  // default rate keeps the critic away from saturation
    nn::AdamState opt = nn::adam_init(c.critic_adam, model.critic->params);
    Rng rng(3);
    Rng eval_rng(4);
    const Index rank = 1;
    const Matrix z_eval = sample_normal(eval_rng, data.rows(), model.d);
    auto gap = [&] { return empirical_loss(model, data, z_eval, rank).critic_gap; };

    for (int k = 0; k < 5; ++k) lwgan_critic_phase(model, opt, data, rank, c, rng);
    const double start = gap();
    int increases = 0;
    const int rounds = 100;
    for (int k = 0; k < rounds; ++k) {
        const double before = gap();
        lwgan_critic_phase(model, opt, data, rank, c, rng);
        if (gap() >= before) ++increases;
    }
    CHECK(increases >= 90);
    CHECK(gap() > start);
    LwganModel other = model;
    other.critic = frozen.critic;
    CHECK(same_params(other, frozen));
}

TEST_CASE("WGAN critic steps ascend the gap on a frozen generator") {
    const Matrix data = swiss(2048, 8);
    LwganModel model = small_model(ModelKind::Wgan, 2, 2, 22);
    TrainConfig c = quick_config(ModelKind::Wgan, 0);
    c.batch_size = 128;
    c.critic_steps = 5;
    c.critic_adam = nn::AdamConfig{};  // default rate keeps the critic away from saturation
    nn::AdamState opt = nn::adam_init(c.critic_adam, model.critic->params);
    Rng rng(5);
    Rng eval_rng(6);
    const Matrix z_eval = sample_normal(eval_rng, data.rows(), model.d);
    const Matrix fake = generate(model, Tensor(z_eval)).values();
    auto gap = [&] {
        return criticize(model, Tensor(data), model.d).values().mean() -
               criticize(model, Tensor(fake), model.d).values().mean();
    };
    for (int k = 0; k < 5; ++k) wgan_critic_phase(model, opt, data, c, rng);
    const double start = gap();
    int increases = 0;
    for (int k = 0; k < 100; ++k) {
        const double before = gap();
        wgan_critic_phase(model, opt, data, c, rng);
        if (gap() >= before) ++increases;
    }
    CHECK(increases >= 90);
    CHECK(gap() > start);
}

TEST_CASE("WAE with zero MMD weight is a plain auto-encoder") {
    const Matrix data = swiss(512, 9);
    TrainConfig c = quick_config(ModelKind::Wae, 400);
    c.wae_lambda = 0.0;
    c.batch_size = 64;
    const TrainResult r = train(c, data, small_model(ModelKind::Wae, 2, 2, 4));
    const auto& h = r.history.records;
    REQUIRE(h.size() == 400);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        first += h[i].recon;
        last += h[h.size() - 1 - i].recon;
        CHECK(h[i].gp == 0.0);
    }
    CHECK(last < 0.7 * first);
}

TEST_CASE("unbiased Gaussian MMD") {
    Rng rng(10);
    const Matrix a = sample_normal(rng, 200, 2);
    const Matrix b = sample_normal(rng, 200, 2);
    Matrix shifted = sample_normal(rng, 200, 2);
    shifted.array() += 3.0;
    const double h = median_pairwise_distance(a, b);
    CHECK(h > 0.0);
    const double same = mmd_gaussian(Tensor(a), b, h).item();
    const double far = mmd_gaussian(Tensor(a), shifted, h).item();
    CHECK(std::abs(same) < 0.02);
    CHECK(far > 0.3);

    // Brute-force oracle on a tiny sample.
    const Matrix q = testing::uniform_matrix(rng, 4, 2);
    const Matrix z = testing::uniform_matrix(rng, 4, 2);
    auto k = [](const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
        return std::exp(-(x - y).squaredNorm() / (2.0 * 1.5 * 1.5));
    };
    double qq = 0.0, zz = 0.0, qz = 0.0;
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            if (i != j) {
                qq += k(q.row(i), q.row(j));
                zz += k(z.row(i), z.row(j));
            }
            qz += k(q.row(i), z.row(j));
        }
    const double oracle = qq / 12.0 + zz / 12.0 - 2.0 * qz / 16.0;
    CHECK(mmd_gaussian(Tensor(q), z, 1.5).item() == doctest::Approx(oracle).epsilon(1e-12));

    CHECK_THROWS_AS(mmd_gaussian(Tensor(q), Matrix::Zero(3, 2), 1.0), ad::ShapeError);
    CHECK_THROWS_AS(mmd_gaussian(Tensor(Matrix::Zero(1, 2)), Matrix::Zero(1, 2), 1.0), std::invalid_argument);
}

TEST_CASE("median pairwise distance") {
    Matrix a(2, 1);
    a << 0.0, 1.0;
    Matrix b(1, 1);
    b << 3.0;
    // Distances 1, 3, 2 -> median 2.
    CHECK(median_pairwise_distance(a, b) == 2.0);
}

TEST_CASE("plateau detector") {
    std::vector<IterationRecord> recs(40);
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].total = 1.0;
    CHECK(plateaued(recs, 20, 1e-3));
    CHECK_FALSE(plateaued(recs, 0, 1e-3));
    CHECK_FALSE(plateaued(recs, 21, 1e-3));  // not enough history
    for (std::size_t i = 20; i < recs.size(); ++i) recs[i].total = 0.9;
    CHECK_FALSE(plateaued(recs, 20, 1e-3));
    CHECK(plateaued(recs, 20, 0.2));
    for (std::size_t i = 20; i < recs.size(); ++i) recs[i].total = 1.0005;
    CHECK(plateaued(recs, 20, 1e-3));
}

TEST_CASE("the convergence rule stops a flat run early") {
    const Matrix data = swiss(256, 12);
    TrainConfig c = quick_config(ModelKind::Wae, 5000);
    c.convergence_window = 20;
    c.convergence_tol = 1e9;  // any two windows agree
    const TrainResult r = train(c, data, small_model(ModelKind::Wae, 2, 2, 4));
    CHECK(r.history.converged);
    CHECK(r.history.records.size() == 40);
}

TEST_CASE("metrics csv layout and read-back") {
    const Matrix data = swiss(128, 13);
    const TrainResult r = train(quick_config(ModelKind::Lwgan, 5), data, small_model(ModelKind::Lwgan, 2, 3, 1));
    testing::TempDir dir("trainer_csv");
    write_metrics_csv(r.history, dir / "m.csv");
    const std::string text = testing::slurp(dir / "m.csv");
    CHECK(text.rfind("iter,rank_s,critic_gap_pre,critic_gap_post,recon,gp\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);

    const TrainHistory back = read_metrics_csv(dir / "m.csv");
    REQUIRE(back.records.size() == r.history.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        CHECK(back.records[i].iter == r.history.records[i].iter);
        CHECK(back.records[i].rank == r.history.records[i].rank);
        CHECK(back.records[i].critic_gap_pre == r.history.records[i].critic_gap_pre);
        CHECK(back.records[i].critic_gap_post == r.history.records[i].critic_gap_post);
        CHECK(back.records[i].recon == r.history.records[i].recon);
        CHECK(back.records[i].gp == r.history.records[i].gp);
    }
    testing::spit(dir / "bad.csv", "iter,rank_s\n1,2\n");
    CHECK_THROWS(read_metrics_csv(dir / "bad.csv"));
    testing::spit(dir / "bad2.csv", "iter,rank_s,critic_gap_pre,critic_gap_post,recon,gp\n1,2,3\n");
    CHECK_THROWS(read_metrics_csv(dir / "bad2.csv"));
}

TEST_CASE("checkpoint round trip is bitwise") {
    testing::TempDir dir("trainer_ckpt");
    for (ModelKind kind : {ModelKind::Lwgan, ModelKind::Wgan, ModelKind::Wae}) {
        CAPTURE(to_string(kind));
        LwganModel m = small_model(kind, 3, 2, 17);
        // Values that need all 17 significant digits.
        Matrix w = m.generator.params.tensors[0].values();
        w(0, 0) = 0.1 + 0.2;
        w(0, 1) = -1.0 / 3.0;
        m.generator.params.tensors[0] = Tensor(w);
        save_checkpoint(m, dir / "c.json");
        const LwganModel back = load_checkpoint(dir / "c.json");
        CHECK(same_params(back, m));
        const std::string text = testing::slurp(dir / "c.json");
        CHECK((text.find("\"encoder\"") != std::string::npos) == (kind != ModelKind::Wgan));
        CHECK((text.find("\"critic\"") != std::string::npos) == (kind != ModelKind::Wae));
    }
}

TEST_CASE("toy checkpoint header records the dimensions") {
    testing::TempDir dir("trainer_toy");
    save_checkpoint(toy_model(ToyDataset::SwissRoll, 1), dir / "c.json");
    const std::string text = testing::slurp(dir / "c.json");
    CHECK(text.find("\"p\":2") != std::string::npos);
    CHECK(text.find("\"d\":5") != std::string::npos);
    const LwganModel back = load_checkpoint(dir / "c.json");
    CHECK(back.p == 2);
    CHECK(back.d == 5);
}

TEST_CASE("checkpoint errors") {
    testing::TempDir dir("trainer_ckpt_err");
    save_checkpoint(small_model(ModelKind::Lwgan, 2, 2, 1), dir / "c.json");
    const std::string text = testing::slurp(dir / "c.json");

    testing::spit(dir / "trunc.json", text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(dir / "trunc.json"), CheckpointError);

    std::string wrong_version = text;
    wrong_version.replace(wrong_version.find("\"version\":1"), 11, "\"version\":9");
    testing::spit(dir / "v.json", wrong_version);
    try {
        (void)load_checkpoint(dir / "v.json");
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        CHECK(std::string(e.what()).find("version 9") != std::string::npos);
    }

    std::string bad_p = text;
    bad_p.replace(bad_p.find("\"p\":2"), 5, "\"p\":4");
    testing::spit(dir / "p.json", bad_p);
    CHECK_THROWS_AS(load_checkpoint(dir / "p.json"), CheckpointError);

    testing::spit(dir / "other.json", "{\"format\":\"something\"}");
    CHECK_THROWS_AS(load_checkpoint(dir / "other.json"), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), CheckpointError);
}

#include <doctest.h>

#include <cmath>

#include <kgcl/learner.hpp>

using namespace kgcl;

namespace {

std::shared_ptr<encoder::HashedEncoder> small_encoder() {
    return std::make_shared<encoder::HashedEncoder>(encoder::HashSpec{64, {1}, 42});
}

LabeledInstance make_instance(const std::string& text, const std::string& label,
                              const std::string& task = "t0") {
    LabeledInstance inst;
    inst.text = text;
    inst.label = label;
    inst.task = task;
    return inst;
}

// Two linearly separable classes over disjoint vocabulary.
std::vector<LabeledInstance> toy_task(size_t per_class, const std::string& task) {
    std::vector<LabeledInstance> data;
    for (size_t i = 0; i < per_class; ++i) {
        data.push_back(make_instance(task + "pos word" + std::to_string(i % 3),
                                     task + ":pos", task));
        data.push_back(make_instance(task + "neg token" + std::to_string(i % 3),
                                     task + ":neg", task));
    }
    return data;
}

}  // namespace

TEST_CASE("class registry is append-only with stable columns") {
    learner::ClassRegistry reg;
    CHECK(reg.add("t0", "t0:a") == 0);
    CHECK(reg.add("t0", "t0:b") == 1);
    CHECK(reg.add("t1", "t1:a") == 2);
    CHECK(reg.column("t0:b") == 1);
    CHECK_THROWS_AS(reg.add("t1", "t0:a"), ConfigError);
    CHECK_THROWS_AS(reg.column("t9:z"), NotFoundError);
}

TEST_CASE("extend_classes preserves old-class logits bit-identically") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:a"}, {"t0", "t0:b"}});
    Rng rng(7);
    for (double& w : model.weights()) w = rng.next_double() - 0.5;
    for (double& b : model.biases()) b = rng.next_double() - 0.5;

    std::vector<std::string> texts;
    std::vector<std::vector<double>> before;
    for (int i = 0; i < 100; ++i) {
        std::string text;
        size_t n = 1 + rng.below(8);
        for (size_t j = 0; j < n; ++j) {
            text += "tok" + std::to_string(rng.below(40)) + " ";
        }
        texts.push_back(text);
        before.push_back(model.logits_sparse(enc->encode_sparse(text)));
    }

    model.extend_classes({{"t1", "t1:a"}, {"t1", "t1:b"}, {"t1", "t1:c"}});
    CHECK(model.class_count() == 5);
    for (size_t i = 0; i < texts.size(); ++i) {
        auto after = model.logits_sparse(enc->encode_sparse(texts[i]));
        REQUIRE(after.size() == 5);
        for (size_t c = 0; c < before[i].size(); ++c) CHECK(after[c] == before[i][c]);
        CHECK(after[2] == 0.0);  // fresh rows start at zero
        CHECK(after[3] == 0.0);
        CHECK(after[4] == 0.0);
    }
}

TEST_CASE("extend_classes rejects duplicates without partial mutation") {
    learner::ClassifierModel model(small_encoder());
    model.extend_classes({{"t0", "t0:a"}});
    CHECK_THROWS_AS(model.extend_classes({{"t1", "t1:x"}, {"t0", "t0:a"}}), ConfigError);
    CHECK_THROWS_AS(model.extend_classes({{"t1", "t1:y"}, {"t1", "t1:y"}}), ConfigError);
    CHECK(model.class_count() == 1);  // the failed calls added nothing
}

TEST_CASE("softmax probabilities are normalized and stable under shift") {
    auto p = learner::ClassifierModel::softmax({1000.0, 1000.0});
    CHECK(std::abs(p[0] - 0.5) < 1e-12);
    CHECK(std::abs(p[1] - 0.5) < 1e-12);
    auto q = learner::ClassifierModel::softmax({0.0, std::log(3.0)});
    CHECK(std::abs(q[0] - 0.25) < 1e-12);
    CHECK(std::abs(q[1] - 0.75) < 1e-12);
}

TEST_CASE("analytic gradient matches central finite differences") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}, {"t1", "t1:pos"}});
    Rng rng(99);
    for (double& w : model.weights()) w = 0.3 * (rng.next_double() - 0.5);
    for (double& b : model.biases()) b = 0.3 * (rng.next_double() - 0.5);

    auto current = learner::detail::encode_all(model, toy_task(4, "t0"), false);
    std::vector<LabeledInstance> rep_src = {make_instance("t1pos word1", "t1:pos", "t1")};
    auto replay = learner::detail::encode_all(model, rep_src, true);

    const double lambda = 0.7, wd = 0.1, h = 1e-6;
    auto [grad_w, grad_b] = learner::joint_gradient(model, current, replay, lambda, wd);

    double max_rel = 0.0;
    auto check_param = [&](double& param, double analytic) {
        double saved = param;
        param = saved + h;
        double up = learner::joint_loss(model, current, replay, lambda, wd);
        param = saved - h;
        double down = learner::joint_loss(model, current, replay, lambda, wd);
        param = saved;
        double numeric = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    };
    // Spot-check a spread of weight coordinates and every bias.
    for (size_t i = 0; i < model.weights().size(); i += 7) {
        check_param(model.weights()[i], grad_w[i]);
    }
    for (size_t i = 0; i < model.biases().size(); ++i) {
        check_param(model.biases()[i], grad_b[i]);
    }
    CHECK(max_rel <= 1e-4);
}

TEST_CASE("joint loss omits the replay term when replay is empty") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}});
    auto current = learner::detail::encode_all(model, toy_task(3, "t0"), false);
    double with_zero_lambda = learner::joint_loss(model, current, {}, 0.0, 0.0);
    double with_big_lambda = learner::joint_loss(model, current, {}, 100.0, 0.0);
    CHECK(with_zero_lambda == with_big_lambda);
}

TEST_CASE("training fits a separable task and returns the best snapshot") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}});
    auto train = toy_task(20, "t0");
    auto valid = toy_task(5, "t0");
    learner::TrainConfig config;
    config.seed = 1;
    auto [trained, report] = learner::train_task(model, train, {}, valid, config);

    CHECK(report.best_valid_accuracy == 1.0);
    CHECK(report.epoch_losses.size() == report.stopped_after_epoch);
    // Loss monotonicity on a separable set: best-snapshot loss < initial loss.
    auto cur = learner::detail::encode_all(trained, train, false);
    double trained_loss =
        learner::joint_loss(trained, cur, {}, config.replay_weight, config.weight_decay);
    auto cur0 = learner::detail::encode_all(model, train, false);
    double initial_loss =
        learner::joint_loss(model, cur0, {}, config.replay_weight, config.weight_decay);
    CHECK(trained_loss < initial_loss);

    size_t hit = 0;
    for (const auto& inst : valid) {
        auto [col, probs] = trained.predict(inst.text);
        if (trained.registry().classes()[col].second == inst.label) ++hit;
    }
    CHECK(hit == valid.size());
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}});
    auto train = toy_task(10, "t0");
    auto valid = toy_task(3, "t0");
    learner::TrainConfig config;
    config.seed = 8;
    auto [a, ra] = learner::train_task(model, train, {}, valid, config);
    auto [b, rb] = learner::train_task(model, train, {}, valid, config);
    CHECK(a.weights() == b.weights());
    CHECK(a.biases() == b.biases());
    CHECK(ra.epoch_losses == rb.epoch_losses);
}

TEST_CASE("train_task validates its configuration") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}});
    auto train = toy_task(3, "t0");
    learner::TrainConfig config;
    CHECK_THROWS_AS(learner::train_task(model, train, {}, {}, config), ConfigError);
    config.patience = config.max_epochs + 1;
    CHECK_THROWS_AS(learner::train_task(model, train, {}, toy_task(1, "t0"), config),
                    ConfigError);
}

TEST_CASE("checkpoints round-trip through JSON") {
    auto enc = small_encoder();
    learner::ClassifierModel model(enc);
    model.extend_classes({{"t0", "t0:pos"}, {"t0", "t0:neg"}});
    auto [trained, report] =
        learner::train_task(model, toy_task(5, "t0"), {}, toy_task(2, "t0"), {});
    auto doc = learner::checkpoint_to_json(trained);
    auto back = learner::checkpoint_from_json(doc);
    CHECK(back.weights() == trained.weights());
    CHECK(back.biases() == trained.biases());
    CHECK(back.predict("t0pos word1").first == trained.predict("t0pos word1").first);
    CHECK_THROWS_AS(learner::checkpoint_from_json(nlohmann::json{{"format", "x"}}), ParseError);
}

TEST_CASE("predict on a zero-class model fails") {
    learner::ClassifierModel model(small_encoder());
    CHECK_THROWS_AS(model.predict("anything"), StateError);
}

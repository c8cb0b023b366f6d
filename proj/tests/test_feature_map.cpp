#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grkbs/feature_map.hpp"

using namespace grkbs;

namespace {

FeatureMapConfig scalar_relu_config() {
    FeatureMapConfig cfg;
    cfg.activation = ActivationKind::relu;
    cfg.envelope = EnvelopeKind::constant_one;
    cfg.box = ParameterBox({-2.0, -2.0}, {2.0, 2.0});
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    return cfg;
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x[0] = v;
    return x;
}

// Compensated (Kahan) summation oracle for the measure evaluation.
double kahan_evaluate(const FeatureMapConfig& cfg, const Eigen::VectorXd& x, const AtomicMeasure& m) {
    double sum = 0.0, comp = 0.0;
    for (const auto& a : m.atoms()) {
        const double term = a.weight * scalar_feature(cfg, x, a.location);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

TEST_CASE("atom feature closed forms") {
    auto cfg = scalar_relu_config();
    const std::vector<double> theta{1.0, 0.0};  // w = 1, b = 0

    CHECK(atom_feature(cfg, vec1(3.0), theta)[0] == doctest::Approx(3.0));
    CHECK(atom_feature(cfg, vec1(-2.0), theta)[0] == 0.0);

    cfg.activation = ActivationKind::tanh;
    const std::vector<double> theta2{2.0, -1.0};  // t = 2 * 0.5 - 1 = 0
    CHECK(atom_feature(cfg, vec1(0.5), theta2)[0] == doctest::Approx(0.0));
}

TEST_CASE("atom feature validates dimensions") {
    const auto cfg = scalar_relu_config();
    Eigen::VectorXd x2(2);
    x2 << 1.0, 2.0;
    const std::vector<double> theta{1.0, 0.0};
    CHECK_THROWS(atom_feature(cfg, x2, theta));
    const std::vector<double> theta3{1.0, 0.0, 0.0};
    CHECK_THROWS(atom_feature(cfg, vec1(1.0), theta3));
}

TEST_CASE("evaluate: zero for the empty measure, scalar multiples of atoms") {
    const auto cfg = scalar_relu_config();
    const AtomicMeasure empty(cfg.box, {});
    CHECK(evaluate(cfg, vec1(3.0), empty).norm() == 0.0);

    const AtomicMeasure single(cfg.box, {{{1.0, 0.0}, 2.0}});
    CHECK(evaluate(cfg, vec1(3.0), single)[0] == doctest::Approx(6.0));
}

TEST_CASE("evaluate rejects a box mismatch") {
    const auto cfg = scalar_relu_config();
    const ParameterBox other({-3.0, -3.0}, {3.0, 3.0});
    const AtomicMeasure m(other, {{{0.5, 0.5}, 1.0}});
    CHECK_THROWS(evaluate(cfg, vec1(1.0), m));
}

TEST_CASE("evaluate matches the compensated-summation oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> loc(-2.0, 2.0);
    std::normal_distribution<double> wgt(0.0, 1.0);
    for (ActivationKind act : {ActivationKind::relu, ActivationKind::tanh, ActivationKind::gaussian}) {
        auto cfg = scalar_relu_config();
        cfg.activation = act;
        std::vector<Atom> atoms;
        for (int i = 0; i < 5; ++i) atoms.push_back({{loc(rng), loc(rng)}, wgt(rng)});
        const AtomicMeasure m(cfg.box, std::move(atoms));
        const auto x = vec1(loc(rng));
        CHECK(evaluate(cfg, x, m)[0] == doctest::Approx(kahan_evaluate(cfg, x, m)).epsilon(1e-12));
    }
}

TEST_CASE("evaluate is linear in the measure") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> loc(-2.0, 2.0);
    std::normal_distribution<double> wgt(0.0, 1.0);
    auto cfg = scalar_relu_config();
    cfg.activation = ActivationKind::tanh;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Atom> a1, a2;
        for (int i = 0; i < 4; ++i) {
            a1.push_back({{loc(rng), loc(rng)}, wgt(rng)});
            a2.push_back({{loc(rng), loc(rng)}, wgt(rng)});
        }
        const AtomicMeasure m1(cfg.box, a1), m2(cfg.box, a2);
        const double alpha = wgt(rng);
        const auto x = vec1(loc(rng));
        const Eigen::VectorXd lhs = evaluate(cfg, x, add(m1.scaled(alpha), m2));
        const Eigen::VectorXd rhs = alpha * evaluate(cfg, x, m1) + evaluate(cfg, x, m2);
        CHECK((lhs - rhs).norm() <= 1e-12);
    }
}

TEST_CASE("operator norm bound on closed-form boxes") {
    FeatureMapConfig cfg;
    cfg.box = ParameterBox({-1.0, -1.0}, {1.0, 1.0});
    cfg.input_dim = 1;
    cfg.output_dim = 1;

    // x = 0: feature reduces to sigma(b) over b in [-1, 1].
    cfg.activation = ActivationKind::relu;
    CHECK(operator_norm_bound(cfg, vec1(0.0)) == doctest::Approx(1.0).epsilon(1e-9));

    cfg.activation = ActivationKind::tanh;
    CHECK(operator_norm_bound(cfg, vec1(0.0)) == doctest::Approx(std::tanh(1.0)).epsilon(1e-9));
}

TEST_CASE("operator norm bound dominates a brute-force grid scan") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> loc(-1.0, 1.0);
    for (ActivationKind act : {ActivationKind::relu, ActivationKind::gaussian}) {
        FeatureMapConfig cfg;
        cfg.activation = act;
        cfg.box = ParameterBox({-1.0, -1.0}, {1.0, 1.0});
        cfg.input_dim = 1;
        cfg.output_dim = 1;
        const auto x = vec1(loc(rng));
        const double bound = operator_norm_bound(cfg, x);

        double brute = 0.0;
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const std::vector<double> theta{-1.0 + 2.0 * i / 99.0, -1.0 + 2.0 * j / 99.0};
                brute = std::max(brute, std::abs(scalar_feature(cfg, x, theta)));
            }
        }
        CHECK(bound >= brute - 1e-9);
    }
}

TEST_CASE("boundedness: ||evaluate|| <= bound * tv_norm") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> loc(-1.0, 1.0);
    std::normal_distribution<double> wgt(0.0, 2.0);
    FeatureMapConfig cfg;
    cfg.activation = ActivationKind::tanh;
    cfg.envelope = EnvelopeKind::cosine_bump;
    cfg.box = ParameterBox({-1.0, -1.0}, {1.0, 1.0});
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Atom> atoms;
        for (int i = 0; i < 6; ++i) atoms.push_back({{loc(rng), loc(rng)}, wgt(rng)});
        const AtomicMeasure m(cfg.box, std::move(atoms));
        const auto x = vec1(loc(rng));
        const double bound = operator_norm_bound(cfg, x);
        CHECK(evaluate(cfg, x, m).norm() <= bound * m.tv_norm() + 1e-9);
    }
}

TEST_CASE("cosine bump envelope vanishes on the boundary") {
    FeatureMapConfig cfg;
    cfg.envelope = EnvelopeKind::cosine_bump;
    cfg.box = ParameterBox({-1.0, -1.0}, {1.0, 1.0});
    cfg.input_dim = 1;
    cfg.output_dim = 1;
    const std::vector<double> edge{-1.0, 0.3};
    CHECK(envelope_value(cfg.envelope, cfg.box, edge) == doctest::Approx(0.0));
    const std::vector<double> center{0.0, 0.0};
    CHECK(envelope_value(cfg.envelope, cfg.box, center) == doctest::Approx(1.0));
}

TEST_CASE("scalar feature gradient matches finite differences") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> loc(-0.8, 0.8);
    for (ActivationKind act : {ActivationKind::tanh, ActivationKind::gaussian}) {
        for (EnvelopeKind env : {EnvelopeKind::constant_one, EnvelopeKind::cosine_bump}) {
            FeatureMapConfig cfg;
            cfg.activation = act;
            cfg.envelope = env;
            cfg.box = ParameterBox({-1.0, -1.0}, {1.0, 1.0});
            cfg.input_dim = 1;
            cfg.output_dim = 1;
            for (int trial = 0; trial < 5; ++trial) {
                const auto x = Eigen::VectorXd::Constant(1, loc(rng)).eval();
                std::vector<double> theta{loc(rng), loc(rng)};
                const auto grad = scalar_feature_grad(cfg, x, theta);
                const double h = 1e-6;
                for (std::size_t k = 0; k < 2; ++k) {
                    auto plus = theta, minus = theta;
                    plus[k] += h;
                    minus[k] -= h;
                    const double fd =
                        (scalar_feature(cfg, x, plus) - scalar_feature(cfg, x, minus)) / (2.0 * h);
                    CHECK(grad[static_cast<Eigen::Index>(k)] == doctest::Approx(fd).epsilon(1e-5));
                }
            }
        }
    }
}

TEST_CASE("compose_forward with a single layer equals evaluate") {
    auto cfg = scalar_relu_config();
    LayerStack stack;
    stack.layers = {cfg};
    const AtomicMeasure m(cfg.box, {{{0.5, 0.25}, 1.5}, {{-0.5, 1.0}, -0.5}});
    const auto x = vec1(0.7);
    CHECK((compose_forward(stack, x, m) - evaluate(cfg, x, m)).norm() == 0.0);
}

TEST_CASE("compose_forward propagates the zero measure to zero") {
    auto layer0 = scalar_relu_config();
    auto layer1 = scalar_relu_config();
    LayerStack stack;
    stack.layers = {layer0, layer1};
    stack.parameters = {AtomicMeasure(layer0.box, {})};
    const AtomicMeasure empty(layer1.box, {});
    CHECK(compose_forward(stack, vec1(0.3), empty).norm() == 0.0);
}

TEST_CASE("compose_forward equals a hand-unrolled two-layer evaluation") {
    auto layer0 = scalar_relu_config();
    layer0.activation = ActivationKind::tanh;
    auto layer1 = scalar_relu_config();
    layer1.activation = ActivationKind::gaussian;

    const AtomicMeasure mu0(layer0.box, {{{0.8, -0.1}, 1.2}});
    const AtomicMeasure mu1(layer1.box, {{{-0.4, 0.9}, -0.7}});

    LayerStack stack;
    stack.layers = {layer0, layer1};
    stack.parameters = {mu0};

    const auto x = vec1(0.6);
    const double e0 = 1.2 * std::tanh(0.8 * 0.6 - 0.1);
    const double t1 = -0.4 * e0 + 0.9;
    const double expected = -0.7 * std::exp(-t1 * t1);
    CHECK(compose_forward(stack, x, mu1)[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("compose_forward is linear in the final measure") {
    auto layer0 = scalar_relu_config();
    layer0.activation = ActivationKind::tanh;
    auto layer1 = scalar_relu_config();
    LayerStack stack;
    stack.layers = {layer0, layer1};
    stack.parameters = {AtomicMeasure(layer0.box, {{{0.4, 0.2}, 0.9}})};

    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> loc(-1.0, 1.0);
    std::normal_distribution<double> wgt(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Atom> a1{{{loc(rng), loc(rng)}, wgt(rng)}};
        std::vector<Atom> a2{{{loc(rng), loc(rng)}, wgt(rng)}};
        const AtomicMeasure m1(layer1.box, a1), m2(layer1.box, a2);
        const double alpha = wgt(rng);
        const auto x = vec1(loc(rng));
        const Eigen::VectorXd lhs = compose_forward(stack, x, add(m1.scaled(alpha), m2));
        const Eigen::VectorXd rhs =
            alpha * compose_forward(stack, x, m1) + compose_forward(stack, x, m2);
        CHECK((lhs - rhs).norm() <= 1e-12);
    }
}

TEST_CASE("layer stack validates dimension chaining") {
    auto layer0 = scalar_relu_config();
    layer0.output_dim = 2;
    auto layer1 = scalar_relu_config();  // input_dim 1, mismatched
    LayerStack stack;
    stack.layers = {layer0, layer1};
    stack.parameters = {AtomicMeasure(layer0.box, {})};
    CHECK_THROWS(stack.validate());
}

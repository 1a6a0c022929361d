#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lvfb/config.hpp"
#include "lvfb/model.hpp"

using namespace lvfb;

namespace {

// Dimensional right-hand sides, evaluated directly.
struct Physical {
    PhysicalParams p;
    double fU(double U, double V) const { return U * (p.a1 - p.b1 * U - p.c1 * V); }
    double fV(double U, double V) const { return V * (p.a2 - p.b2 * U - p.c2 * V); }
};

}  // namespace

TEST_CASE("rescaled reaction terms reproduce the dimensional ones")
{
    PhysicalParams p{.d1 = 0.7, .d2 = 1.9, .a1 = 2.5, .a2 = 0.8, .b1 = 1.3, .c2 = 0.6, .c1 = 0.4, .b2 = 2.2,
                     .mu_hat = 3.0, .H0 = 4.0};
    const Physical phys{p};
    const auto nd = nondimensionalize(p, 2);
    const ModelParams& m = nd.model;
    CHECK(m.N == 2);

    // u = U / (a1/b1), v = V / (a2/c2), t = a2 T, x = sqrt(a2/d2) X.
    const double Us = p.a1 / p.b1, Vs = p.a2 / p.c2;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> dist(0.0, 1.5);
    for (int k = 0; k < 50; ++k) {
        const double u = dist(gen), v = dist(gen);
        const double U = Us * u, V = Vs * v;
        CHECK(phys.fU(U, V) / (p.a2 * Us) == doctest::Approx(m.r * u * (1 - u - m.b * v)).epsilon(1e-12));
        CHECK(phys.fV(U, V) / (p.a2 * Vs) == doctest::Approx(v * (1 - v - m.a * u)).epsilon(1e-12));
    }
    // diffusion: d1 U_XX / (a2 Us) = (d1/d2) u_xx
    CHECK(m.d == doctest::Approx(p.d1 / p.d2));
    // front: h_t = sqrt(a2/d2)/a2 H_T = -sqrt(a2/d2)/a2 mu_hat Us sqrt(a2/d2) u_x
    CHECK(m.mu == doctest::Approx(p.mu_hat * Us / p.d2));
    CHECK(nd.h0 == doctest::Approx(std::sqrt(p.a2 / p.d2) * p.H0));
}

TEST_CASE("regimes")
{
    ModelParams m;
    CHECK(classify(m) == CompetitionRegime::SuperiorU);
    m.a = 0.5;
    m.b = 2.0;
    CHECK(classify(m) == CompetitionRegime::InferiorU);
    m.a = 2.0;
    CHECK(classify(m) == CompetitionRegime::Other);
    CHECK(to_string(CompetitionRegime::SuperiorU) == "SuperiorU");
}

TEST_CASE("parameter validation")
{
    ModelParams m;
    CHECK_NOTHROW(m.validate());
    m.b = 0.0;
    CHECK_NOTHROW(m.validate());
    m.d = 0.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = {};
    m.mu = -1.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = {};
    m.N = 0;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m = {};
    m.a = std::nan("");
    CHECK_THROWS_AS(m.validate(), DomainError);

    PhysicalParams p;
    p.c1 = 0.0;
    CHECK_THROWS_AS(nondimensionalize(p), DomainError);

    GrowthOffsets off{.eps_u = -1.0};
    CHECK_THROWS_AS(off.validate(), DomainError);
}

TEST_CASE("config: comments, overrides, lists")
{
    const auto cfg = KeyValueConfig::parse("# head\n a = 3 # trailing\nb=0.25\nb = 0.5\nmu_list = 0.1, 1 10\n");
    CHECK(cfg.get_double("a") == 3.0);
    CHECK(cfg.get_double("b") == 0.5);
    const auto mus = cfg.get_doubles("mu_list");
    REQUIRE(mus);
    CHECK(mus->size() == 3);
    CHECK((*mus)[2] == 10.0);
    const auto cm = model_from_config(cfg);
    CHECK(cm.model.a == 3.0);
    CHECK_FALSE(cm.from_physical);
}

TEST_CASE("config: physical block wins and must be complete")
{
    const auto full = KeyValueConfig::parse(
        "a = 9\nd1=1\nd2=1\na1=1\na2=1\nb1=1\nb2=2\nc1=0.5\nc2=1\nmu_hat=1\nH0=5\n");
    const auto cm = model_from_config(full);
    CHECK(cm.from_physical);
    CHECK(cm.model.a == doctest::Approx(2.0));
    CHECK(cm.model.b == doctest::Approx(0.5));
    CHECK(cm.h0 == doctest::Approx(5.0));

    CHECK_THROWS_AS(model_from_config(KeyValueConfig::parse("d1 = 1\n")), ConfigError);
}

TEST_CASE("config: malformed input")
{
    CHECK_THROWS_AS(KeyValueConfig::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("a = x\n").get_double("a"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/params.cfg"), ConfigError);
}

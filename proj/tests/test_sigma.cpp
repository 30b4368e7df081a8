#include <catch2/catch_amalgamated.hpp>

#include "certilasso/sigma.hpp"
#include "support/instances.hpp"

using namespace certilasso;
using namespace certilasso::testsupport;

namespace {
const Rational kTenth = make_rational(1, 10);

LassoCertificate cert_of(const Instance& ins) {
    return ulasso_enumerate(ins.y, ins.A, ins.lambda);
}
}  // namespace

TEST_CASE("sigma values on the correlated pair", "[sigma]") {
    Instance ins = correlated_pair(kTenth, kTenth);
    auto cert = cert_of(ins);
    auto [s1, s3, S] = sigma_values(cert, ins.y, ins.A, ins.lambda);
    CHECK(S == std::vector<int>{1});
    CHECK_FALSE(s1.infinite);
    CHECK(s1.value == make_rational(1, 200));
    CHECK_FALSE(s3.infinite);
    CHECK(s3.value == make_rational(19, 20));
}

TEST_CASE("sigma values honour the empty-support conventions", "[sigma]") {
    Instance zero{RVector{Rational(0)}, RMatrix{{Rational(0)}}, kTenth};
    auto cert = cert_of(zero);
    auto [s1, s3, S] = sigma_values(cert, zero.y, zero.A, zero.lambda);
    CHECK(S.empty());
    CHECK(s1.value == kTenth / 2);
    CHECK(s3.infinite);

    // full support: S^c empty means the off-support max is 0, so sigma1 = lambda/2
    RVector y{Rational(1), Rational(1)};
    RMatrix I2{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    auto ic = ulasso_enumerate(y, I2, Rational(1));
    auto [t1, t3, T] = sigma_values(ic, y, I2, Rational(1));
    CHECK(T == std::vector<int>{0, 1});
    CHECK(t1.value == make_rational(1, 2));
    CHECK(t3.value == make_rational(1, 2));
}

TEST_CASE("sigma_test thresholds on the correlated pair", "[sigma]") {
    Instance ins = correlated_pair(kTenth, kTenth);
    auto cert = cert_of(ins);
    // sigma = min(1/200, 1, 19/20) = 1/200
    auto low = sigma_test(ins.y, ins.A, cert, ins.lambda, make_rational(1, 1000));
    CHECK_FALSE(low.sigma_leq_C2);  // 1/200 > 1e-6
    CHECK_FALSE(low.degenerate);
    CHECK(low.sigma2_exceeds_C);

    auto high = sigma_test(ins.y, ins.A, cert, ins.lambda, kTenth);
    CHECK(high.sigma_leq_C2);  // C^2 = 1/100 >= 1/200... threshold crossed
    CHECK_FALSE(high.degenerate);
    CHECK_THROWS_AS(sigma_test(ins.y, ins.A, cert, ins.lambda, Rational(0)), ContractError);
}

TEST_CASE("degenerate branch answers true", "[sigma]") {
    // duplicate columns: the margin is exactly lambda/2
    RVector y{Rational(1)};
    RMatrix A{{Rational(1), Rational(1)}};
    auto cert = ulasso_enumerate(y, A, kTenth);
    auto rep = sigma_test(y, A, cert, kTenth, make_rational(1, 1000));
    CHECK(rep.degenerate);
    CHECK(rep.sigma_leq_C2);

    // singular support Gram on an interior minimiser
    RVector y2{Rational(1), Rational(1)};
    RMatrix A2{{Rational(1), Rational(1)}, {Rational(1), Rational(1)}};
    Rational s = 1 - kTenth / 4;
    auto check = verify_kkt(y2, A2, kTenth, RVector{s / 2, s / 2});
    auto* c2 = std::get_if<LassoCertificate>(&check);
    REQUIRE(c2 != nullptr);
    auto rep2 = sigma_test(y2, A2, *c2, kTenth, Rational(1));
    CHECK(rep2.degenerate);
    CHECK(rep2.sigma_leq_C2);
}

TEST_CASE("report invariants", "[sigma]") {
    CounterRng rng(5150);
    for (int trial = 0; trial < 80; ++trial) {
        Instance ins = random_instance(rng, 1000 + 211 * trial, 1 + trial % 3, 3 + trial % 2,
                                       make_rational(1 + trial % 2, 2));
        auto certs = enumerate_certificates(ins.y, ins.A, ins.lambda);
        if (certs.empty()) continue;
        Rational C = make_rational(1 + static_cast<long>(rng.at(trial) % 64), 32);
        auto rep = sigma_test(ins.y, ins.A, certs[0], ins.lambda, C);
        if (rep.degenerate) {
            CHECK(rep.sigma_leq_C2);
        } else {
            Rational C2 = C * C;
            bool expect = rep.sigma1.leq(C2) || rep.sigma3.leq(C2) || !rep.sigma2_exceeds_C;
            CHECK(rep.sigma_leq_C2 == expect);
        }
    }
}

TEST_CASE("agreement with the eigen-threshold brute force", "[sigma]") {
    CounterRng rng(60601);
    int checked = 0;
    for (int trial = 0; checked < 120 && trial < 400; ++trial) {
        std::size_t m = 1 + rng.at(trial * 3) % 3;
        std::size_t N = m + rng.at(trial * 3 + 1) % (5 - m);
        Instance ins = random_instance(rng, 300000 + 701 * trial, m, N,
                                       make_rational(1 + trial % 3, 2));
        auto certs = enumerate_certificates(ins.y, ins.A, ins.lambda);
        if (certs.empty()) continue;
        for (int ci = 0; ci < 3; ++ci) {
            Rational C = make_rational(1 + static_cast<long>(rng.at(trial * 7 + ci) % 512), 256);
            bool mine = sigma_test(ins.y, ins.A, certs[0], ins.lambda, C).sigma_leq_C2;
            bool brute = sigma_leq_C2_bruteforce(ins.y, ins.A, certs[0], ins.lambda, C);
            REQUIRE(mine == brute);
        }
        ++checked;
    }
    CHECK(checked == 120);
}

TEST_CASE("monotonicity in C", "[sigma]") {
    CounterRng rng(777777);
    for (int trial = 0; trial < 30; ++trial) {
        Instance ins = random_instance(rng, 500000 + 97 * trial, 2, 3, Rational(1));
        auto certs = enumerate_certificates(ins.y, ins.A, ins.lambda);
        if (certs.empty()) continue;
        Rational C = make_rational(1 + static_cast<long>(rng.at(trial) % 128), 64);
        if (!sigma_test(ins.y, ins.A, certs[0], ins.lambda, C).sigma_leq_C2) {
            for (int k = 1; k <= 4; ++k) {
                Rational smaller = C / (1 << k);
                CHECK_FALSE(
                    sigma_test(ins.y, ins.A, certs[0], ins.lambda, smaller).sigma_leq_C2);
            }
        }
    }
}

TEST_CASE("posdef threshold matches eigenvalue comparison", "[sigma]") {
    CounterRng rng(808);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t r = 1 + rng.at(trial) % 4;
        RMatrix B(r, r);
        std::uint64_t c = trial * 59;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                B(i, j) = make_rational(static_cast<long>(rng.at(c++) % 9) - 4, 2);
        std::vector<int> all(r);
        for (std::size_t i = 0; i < r; ++i) all[i] = static_cast<int>(i);
        RMatrix G = gram(B, all);  // PSD
        Rational t = make_rational(1 + static_cast<long>(rng.at(c) % 16), 8);
        RMatrix X = G;
        for (std::size_t i = 0; i < r; ++i) X(i, i) -= t;
        CHECK(posdef(X) == eigs_exceed(G, t));
    }
}

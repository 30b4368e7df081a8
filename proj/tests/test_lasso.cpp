#include <catch2/catch_amalgamated.hpp>

#include "certilasso/lasso.hpp"
#include "support/instances.hpp"

using namespace certilasso;
using namespace certilasso::testsupport;

namespace {
const Rational kTenth = make_rational(1, 10);
}

TEST_CASE("verify_kkt accepts the certified minimiser", "[lasso]") {
    // y = 1, A = (9/10, 1), lambda = 1/10, x = (0, 19/20)
    RVector y{Rational(1)};
    RMatrix A{{make_rational(9, 10), Rational(1)}};
    RVector x{Rational(0), make_rational(19, 20)};
    auto check = verify_kkt(y, A, kTenth, x);
    auto* cert = std::get_if<LassoCertificate>(&check);
    REQUIRE(cert != nullptr);
    CHECK(cert->support == std::vector<int>{1});
    CHECK(cert->sign_on_support == std::vector<int>{1});
    CHECK(cert->kkt_off_support_margin == make_rational(1, 200));
    for (const auto& r : cert->kkt_on_support_residual) CHECK(r == 0);
}

TEST_CASE("verify_kkt zero instance", "[lasso]") {
    RVector y{Rational(0)};
    RMatrix A{{Rational(0)}};
    auto check = verify_kkt(y, A, kTenth, RVector{Rational(0)});
    auto* cert = std::get_if<LassoCertificate>(&check);
    REQUIRE(cert != nullptr);
    CHECK(cert->support.empty());
    CHECK(cert->kkt_off_support_margin == kTenth / 2);
}

TEST_CASE("verify_kkt rejects the swapped support with the violated condition", "[lasso]") {
    RVector y{Rational(1)};
    RMatrix A{{make_rational(9, 10), Rational(1)}};
    RVector x{make_rational(19, 20), Rational(0)};
    auto check = verify_kkt(y, A, kTenth, x);
    auto* rej = std::get_if<KktRejection>(&check);
    REQUIRE(rej != nullptr);
    CHECK(rej->reason == KktRejection::Reason::on_support_residual_nonzero);
    CHECK(rej->index == 0);
}

TEST_CASE("enumerate solves the correlated-pair family", "[lasso]") {
    Instance ins = correlated_pair(make_rational(1, 1000), kTenth);
    auto cert = ulasso_enumerate(ins.y, ins.A, ins.lambda);
    CHECK(cert.support == std::vector<int>{1});
    CHECK(cert.x[1] == make_rational(19, 20));
    CHECK(cert.x[0] == 0);
}

TEST_CASE("enumerate: zero instance and the identity instance", "[lasso]") {
    auto zero = ulasso_enumerate(RVector{Rational(0)}, RMatrix{{Rational(0)}}, kTenth);
    CHECK(zero.support.empty());
    CHECK(zero.x[0] == 0);

    RVector y{Rational(1), Rational(1)};
    RMatrix I2{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}};
    auto cert = ulasso_enumerate(y, I2, Rational(1));
    CHECK(cert.support == std::vector<int>{0, 1});
    CHECK(cert.x[0] == make_rational(1, 2));
    CHECK(cert.x[1] == make_rational(1, 2));
}

TEST_CASE("enumeration cap is enforced", "[lasso]") {
    RVector y{Rational(1)};
    RMatrix A(1, 13, Rational(1));
    CHECK_THROWS_AS(ulasso_enumerate(y, A, Rational(1)), InstanceTooLargeError);
}

TEST_CASE("minimal support pair on duplicate columns", "[lasso]") {
    RVector y{Rational(1)};
    RMatrix A{{Rational(1), Rational(1)}};
    auto pair = minimal_support_pair(y, A, kTenth);
    REQUIRE(pair.has_value());
    CHECK(pair->first.support != pair->second.support);
    std::set<std::vector<int>> got{pair->first.support, pair->second.support};
    std::set<std::vector<int>> want{{0}, {1}};
    CHECK(got == want);
    // the exchangeable solutions both carry value 19/20 on their coordinate
    CHECK(pair->first.x[pair->first.support[0]] == make_rational(19, 20));
    CHECK(pair->second.x[pair->second.support[0]] == make_rational(19, 20));

    // unique-solution instances yield no pair
    Instance well = correlated_pair(kTenth, kTenth);
    CHECK_FALSE(minimal_support_pair(well.y, well.A, well.lambda).has_value());
    CHECK_FALSE(
        minimal_support_pair(RVector{Rational(0)}, RMatrix{{Rational(0)}}, kTenth).has_value());
}

TEST_CASE("UL1 and UL4 as exact properties", "[lasso]") {
    CounterRng rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        Instance ins = random_instance(rng, 5000 + trial * 131, 1 + trial % 2, 2 + trial % 3,
                                       make_rational(1 + trial % 3, 2));
        auto certs = enumerate_certificates(ins.y, ins.A, ins.lambda);
        Rational y2 = two_norm_sq(ins.y);
        for (const auto& c : certs) {
            // UL1: lambda ||x||_1 <= ||y||^2 and ||Ax - y||^2 <= ||y||^2
            CHECK(ins.lambda * one_norm(c.x) <= y2);
            RVector r = mat_vec(ins.A, c.x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ins.y[i];
            CHECK(two_norm_sq(r) <= y2);
        }
        // UL4: any two certified minimisers share Ax and the l1 norm
        for (std::size_t i = 0; i < certs.size(); ++i)
            for (std::size_t j = i + 1; j < certs.size(); ++j) {
                CHECK(mat_vec(ins.A, certs[i].x) == mat_vec(ins.A, certs[j].x));
                CHECK(one_norm(certs[i].x) == one_norm(certs[j].x));
            }
    }
}

TEST_CASE("certified objective beats a million random points", "[lasso]") {
    CounterRng rng(777);
    for (int trial = 0; trial < 3; ++trial) {
        Instance ins = random_well_posed(rng, 90000 + trial * 1000, 2, 3, Rational(1));
        auto cert = ulasso_enumerate(ins.y, ins.A, ins.lambda);
        Rational fstar = lasso_objective_exact(ins.y, ins.A, ins.lambda, cert.x);
        for (const auto& c : enumerate_certificates(ins.y, ins.A, ins.lambda))
            CHECK(lasso_objective_exact(ins.y, ins.A, ins.lambda, c.x) == fstar);
        std::uint64_t ctr = 0;
        CounterRng prng = rng.fork(trial);
        long violations = 0;
        for (long p = 0; p < 1000000; ++p) {
            RVector x(3);
            for (std::size_t k = 0; k < 3; ++k)
                x[k] = make_rational(static_cast<long>(prng.at(ctr++) % 4097) - 2048, 512);
            if (lasso_objective_exact(ins.y, ins.A, ins.lambda, x) < fstar) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("purified path equals enumeration on random instances", "[lasso]") {
    CounterRng rng(31337);
    int compared = 0;
    for (int trial = 0; trial < 12; ++trial) {
        Instance ins = random_instance(rng, 40000 + trial * 257, 3, 5, Rational(1));
        auto byenum = enumerate_certificates(ins.y, ins.A, ins.lambda);
        if (byenum.empty()) continue;
        bool unique = true;
        for (std::size_t i = 1; i < byenum.size(); ++i)
            if (byenum[i].support != byenum[0].support) unique = false;
        if (!unique) continue;
        auto cert = ulasso_certified(ins.y, ins.A, ins.lambda);
        CHECK(cert.support == byenum[0].support);
        CHECK(cert.x == byenum[0].x);
        ++compared;
    }
    CHECK(compared >= 8);
}

TEST_CASE("purified path falls back on the hard correlated pair", "[lasso]") {
    Instance ins = correlated_pair(make_rational(1, 1000000), kTenth);
    auto cert = ulasso_certified(ins.y, ins.A, ins.lambda);
    CHECK(cert.support == std::vector<int>{1});
    CHECK(cert.x[1] == make_rational(19, 20));
}

TEST_CASE("exact guess passes purification unchanged", "[lasso]") {
    Instance ins = correlated_pair(kTenth, kTenth);
    DVector guess(2);
    guess[0] = 0.0;
    guess[1] = 0.95;
    auto cert = ulasso_purified(ins.y, ins.A, ins.lambda, guess);
    CHECK(cert.support == std::vector<int>{1});
    CHECK(cert.x[1] == make_rational(19, 20));
}

TEST_CASE("qp reformulation is PSD and matches the split objective", "[lasso]") {
    CounterRng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        Instance ins = random_instance(rng, 60000 + trial * 419, 2, 3, Rational(1));
        QpReformulation qp = build_qp_reformulation(ins.y, ins.A, ins.lambda);
        REQUIRE(qp.M.rows() == 6);
        CHECK(is_symmetric(qp.M));
        RMatrix shifted = qp.M;
        for (std::size_t i = 0; i < 6; ++i) shifted(i, i) += make_rational(1, 7);
        CHECK(posdef(shifted));
        std::uint64_t ctr = 0;
        CounterRng prng = rng.fork(1000 + trial);
        for (int p = 0; p < 50; ++p) {
            RVector xt(6);
            for (std::size_t k = 0; k < 6; ++k)
                xt[k] = make_rational(static_cast<long>(prng.at(ctr++) % 41) - 20, 8);
            CHECK(dot(xt, mat_vec(qp.M, xt)) >= 0);
        }
        // for a nonnegative split xt = (x+, x-):
        //   xt^T M xt + linear^T xt + ||y||^2 = ||A(x+ - x-) - y||^2 + lambda * sum(xt)
        CounterRng qrng = rng.fork(2000 + trial);
        ctr = 0;
        for (int p = 0; p < 20; ++p) {
            RVector xt(6);
            for (std::size_t k = 0; k < 6; ++k)
                xt[k] = make_rational(static_cast<long>(qrng.at(ctr++) % 17), 8);
            RVector x(3);
            for (std::size_t k = 0; k < 3; ++k) x[k] = xt[k] - xt[k + 3];
            Rational qp_val = dot(xt, mat_vec(qp.M, xt)) + dot(qp.linear, xt) + two_norm_sq(ins.y);
            RVector r = mat_vec(ins.A, x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ins.y[i];
            Rational split_l1(0);
            for (std::size_t k = 0; k < 6; ++k) split_l1 += xt[k];
            CHECK(qp_val == two_norm_sq(r) + ins.lambda * split_l1);
        }
    }
}

#include "branchlab/error.hpp"
#include "branchlab/estimator.hpp"
#include "branchlab/extreal.hpp"
#include "branchlab/numerics.hpp"
#include "branchlab/parallel.hpp"
#include "branchlab/rng.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

using namespace branchlab;
using Catch::Matchers::WithinAbs;

TEST_CASE("philox known answer", "[rng]")
{
    // Random123 kat_vectors: philox4x32_10, counter 0, key 0
    Philox4x32 g(0);
    CHECK(g() == 0x6627e8d5u);
    CHECK(g() == 0xe169c58du);
    CHECK(g() == 0xbc57ac4cu);
    CHECK(g() == 0x9b00dbd8u);
}

TEST_CASE("streams are reproducible and children differ", "[rng]")
{
    Stream a(replica_key(7, 3)), b(replica_key(7, 3));
    for (int i = 0; i < 100; ++i)
        CHECK(a.uniform() == b.uniform());

    std::set<std::uint64_t> keys;
    const Stream root(replica_key(7, 0));
    keys.insert(root.key());
    keys.insert(root.child(1).key());
    keys.insert(root.child(2).key());
    keys.insert(root.child(1).child(2).key());
    keys.insert(root.child(2).child(1).key());
    keys.insert(Stream(replica_key(7, 1)).key());
    keys.insert(Stream(replica_key(8, 0)).key());
    CHECK(keys.size() == 7);
}

TEST_CASE("uniform and normal moments", "[rng]")
{
    Stream s(42);
    double su = 0, sn = 0, sn2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK_THAT(su / n, WithinAbs(0.5, 0.005));
    CHECK_THAT(sn / n, WithinAbs(0.0, 0.01));
    CHECK_THAT(sn2 / n, WithinAbs(1.0, 0.01));
}

TEST_CASE("extended reals", "[numerics]")
{
    const ExtReal ninf;
    CHECK(ninf.is_neg_inf());
    CHECK(ninf.str() == "-inf");
    CHECK(ExtReal(0.5).str() == "0.5");
    CHECK(ninf < ExtReal(-1e300));
    CHECK(log_add(ninf, ExtReal(2.0)) == ExtReal(2.0));
    CHECK(log_add(ninf, ninf).is_neg_inf());
    CHECK_THAT(log_add(ExtReal(0.0), ExtReal(0.0)).value(), WithinAbs(std::log(2.0), 1e-15));
    CHECK_THAT(log_add(ExtReal(1000.0), ExtReal(1000.0)).value(), WithinAbs(1000.0 + std::log(2.0), 1e-12));
    CHECK_THROWS_AS(ninf.value(), Error);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("quadrature and optimization wrappers", "[numerics]")
{
    CHECK_THAT(simpson([](double x) { return x * x * x; }, 0.0, 2.0, 2), WithinAbs(4.0, 1e-14));
    const auto q = integrate([](double x) { return std::exp(-x * x); }, 0.0, 10.0);
    CHECK_THAT(q.value, WithinAbs(std::sqrt(M_PI) / 2.0, 1e-13));
    const auto cum = cumulative_simpson([](double x) { return std::cos(x); }, 0.0, M_PI, 8, 16);
    REQUIRE(cum.size() == 9);
    CHECK(cum.front() == 0.0);
    CHECK_THAT(cum[4], WithinAbs(1.0, 1e-8));
    CHECK_THAT(cum[8], WithinAbs(0.0, 1e-8));

    const auto m = minimize([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, -1.0, 1.0);
    CHECK_THAT(m.value, WithinAbs(1.0, 1e-14));
    CHECK_THAT(m.arg, WithinAbs(0.3, 1e-7));
    CHECK_THAT(bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-13), WithinAbs(std::sqrt(2.0), 1e-12));
}

TEST_CASE("summary statistics", "[numerics]")
{
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    CHECK_THAT(ls_slope(x, y), WithinAbs(2.0, 1e-14));

    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    const auto e = summarize(s, 9);
    CHECK(e.mean == 2.5);
    CHECK_THAT(e.std_error, WithinAbs(std::sqrt(5.0 / 3.0 / 4.0), 1e-14));
    CHECK(e.replicas == 4);
    CHECK(within_se(e, 2.5 + 3.0 * e.std_error));
    CHECK_FALSE(within_se(e, 2.5 + 3.1 * e.std_error));
}

TEST_CASE("goodness-of-fit tests", "[numerics]")
{
    Stream s(1);
    std::vector<double> z(20000);
    for (auto& v : z)
        v = s.normal();
    CHECK(ks_test(z, normal_cdf).p_value > 1e-3);
    std::vector<double> shifted = z;
    for (auto& v : shifted)
        v += 0.1;
    CHECK(ks_test(shifted, normal_cdf).p_value < 1e-6);

    const std::vector<double> obs{98, 102, 100, 100};
    const std::vector<double> exp{100, 100, 100, 100};
    const auto chi = chi_square_test(obs, exp);
    CHECK_THAT(chi.statistic, WithinAbs(0.08, 1e-12));
    CHECK(chi.dof == 3.0);
    CHECK(chi.p_value > 0.99);
    const std::vector<double> one{10}, ten{10};
    CHECK_THROWS_AS(chi_square_test(one, ten), Error);
}

TEST_CASE("parallel_map keeps index order and propagates errors", "[numerics]")
{
    const auto v = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(v[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(parallel_map(10,
                                 [](std::size_t i) {
                                     if (i == 7)
                                         throw Error(Errc::CapExceeded, "boom");
                                     return 0;
                                 }),
                    Error);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "bstt/combinatorics.hpp"
#include "bstt/dictionary.hpp"
#include "bstt/spaces.hpp"

using namespace bstt;

TEST_SUITE("spaces") {

TEST_CASE("monomial dictionary evaluates direct powers") {
    Dictionary dict = Dictionary::monomial(3);
    Eigen::VectorXd v = dict(2.0);
    CHECK(v(0) == 1.0);
    CHECK(v(1) == 2.0);
    CHECK(v(2) == 4.0);
}

TEST_CASE("legendre dictionary: value one at x = 1 and the quadratic at 1/2") {
    Dictionary dict = Dictionary::legendre(4);
    Eigen::VectorXd at1 = dict(1.0);
    for (Eigen::Index k = 0; k < 4; ++k) CHECK(at1(k) == doctest::Approx(1.0).epsilon(1e-14));

    Dictionary d3 = Dictionary::legendre(3);
    Eigen::VectorXd v = d3(0.5);
    CHECK(v(0) == doctest::Approx(1.0));
    CHECK(v(1) == doctest::Approx(0.5));
    CHECK(v(2) == doctest::Approx(-0.125));  // (3x^2 - 1)/2 at 1/2
}

TEST_CASE("every dictionary entry k has degree exactly k-1") {
    for (const Dictionary& dict : {Dictionary::monomial(5), Dictionary::legendre(5)}) {
        const Eigen::Index p = dict.size();
        // fit a degree-p interpolating polynomial through p+1 nodes; exactness of
        // the fit means coefficients beyond the entry's degree must vanish
        const Eigen::Index n = p + 1;
        Eigen::VectorXd nodes(n);
        for (Eigen::Index i = 0; i < n; ++i) nodes(i) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        Eigen::MatrixXd vand(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double pw = 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                vand(i, j) = pw;
                pw *= nodes(i);
            }
        }
        Eigen::MatrixXd samples(n, p);
        for (Eigen::Index i = 0; i < n; ++i) samples.row(i) = dict(nodes(i)).transpose();
        Eigen::MatrixXd coeff = vand.fullPivLu().solve(samples);
        for (Eigen::Index k = 0; k < p; ++k) {
            CHECK(std::abs(coeff(k, k)) > 1e-8);
            for (Eigen::Index j = k + 1; j < n; ++j) CHECK(std::abs(coeff(j, k)) < 1e-8);
        }
    }
}

TEST_CASE("custom dictionaries are degree-checked at registration") {
    CHECK_NOTHROW(Dictionary::custom(
        3, [](double x) { return Eigen::Vector3d(1.0, 2.0 * x, x * x - 0.5); }, "shifted"));
    // second entry constant: wrong degree
    CHECK_THROWS(Dictionary::custom(
        3, [](double x) { return Eigen::Vector3d(1.0, 1.0, x * x); }, "bad"));
    // second entry quadratic: exceeds its slot
    CHECK_THROWS(Dictionary::custom(
        3, [](double x) { return Eigen::Vector3d(1.0, x * x, x * x); }, "bad2"));
}

TEST_CASE("descriptor strings round trip") {
    for (const char* text :
         {"V(d=8,p=3)", "T(r=6;V(d=8,p=3))", "W(d=8,g=2)", "B(rho=4;W(d=8,g=2))", "S(d=10,g=5)",
          "S(d=10,g=5,rho=3)", "S(d=10,g=5,rho=3,aug)"}) {
        SpaceDescriptor s = SpaceDescriptor::parse(text);
        CHECK(s.str() == text);
        CHECK(SpaceDescriptor::parse(s.str()).str() == s.str());
    }
    CHECK(SpaceDescriptor::parse(" B( rho=4 ; W(d=8, g=2) ) ").str() == "B(rho=4;W(d=8,g=2))");
    CHECK_THROWS(SpaceDescriptor::parse("Q(d=2)"));
    CHECK_THROWS(SpaceDescriptor::parse("W(d=2)"));
    CHECK_THROWS(SpaceDescriptor::parse("S(d=2,g=1,aug)"));  // aug needs rho
}

TEST_CASE("space dimensions match the published counts") {
    CHECK(space_dimension(SpaceDescriptor::parse("W(d=8,g=2)")) == 36);
    CHECK(space_dimension(SpaceDescriptor::parse("S(d=6,g=7)")) == 1716);
    CHECK(space_dimension(SpaceDescriptor::parse("S(d=10,g=5)")) == 3003);
    CHECK(space_dimension(SpaceDescriptor::parse("V(d=10,p=6)")) == 60466176);
    CHECK_THROWS(space_dimension(SpaceDescriptor::parse("T(r=6;V(d=8,p=3))")));
    CHECK_THROWS(space_dimension(SpaceDescriptor::parse("B(rho=4;W(d=8,g=2))")));
}

TEST_CASE("W dimension equals the brute-force composition count") {
    for (int d = 1; d <= 6; ++d)
        for (int g = 0; g <= 4; ++g) {
            const int p = g + 1;
            // count m in {0..p-1}^d with sum m_k = g
            std::int64_t count = 0;
            std::vector<int> m(static_cast<std::size_t>(d), 0);
            while (true) {
                int sum = 0;
                for (int v : m) sum += v;
                if (sum == g) ++count;
                int k = d - 1;
                while (k >= 0 && ++m[static_cast<std::size_t>(k)] == p) m[static_cast<std::size_t>(k--)] = 0;
                if (k < 0) break;
            }
            SpaceDescriptor s;
            s.family = SpaceDescriptor::Family::W;
            s.d = d;
            s.g = g;
            s.p = p;
            CHECK(space_dimension(s) == count);
        }
}

TEST_CASE("variation constants: closed forms") {
    CHECK(variation_constant(SpaceDescriptor::parse("V(d=3,p=4)"), false).value ==
          doctest::Approx(4096.0));  // p^(2d)
    auto w = variation_constant(SpaceDescriptor::parse("W(d=10,g=5)"), true);
    CHECK(w.value == doctest::Approx(2002.0));
    CHECK(!w.is_upper_bound);
    auto wu = variation_constant(SpaceDescriptor::parse("W(d=10,g=5)"), false);
    CHECK(wu.is_upper_bound);
    CHECK(wu.value == doctest::Approx(2002.0 * 3.0 * 3.0 * 3.0 * 3.0 * 3.0 * 1.0 * 1.0 * 1.0 * 1.0 * 1.0));
    CHECK_THROWS(variation_constant(SpaceDescriptor::parse("S(d=3,g=2)"), false));
}

TEST_CASE("unweighted K(V) matches a grid supremum of the orthonormal kernel") {
    // d = 2, p = 3 on a 101 x 101 grid: sup_x sum_l prod_k (2 l_k + 1) P_{l_k}(x_k)^2
    Dictionary dict = Dictionary::legendre(3);
    double best = 0.0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double x = -1.0 + 0.02 * i;
            const double y = -1.0 + 0.02 * j;
            Eigen::VectorXd px = dict(x), py = dict(y);
            double sum = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    sum += (2.0 * a + 1.0) * (2.0 * b + 1.0) * px(a) * px(a) * py(b) * py(b);
            best = std::max(best, sum);
        }
    const double closed = variation_constant(SpaceDescriptor::parse("V(d=2,p=3)"), false).value;
    CHECK(closed == doctest::Approx(81.0));
    CHECK(std::abs(best - closed) <= 0.01 * closed);
}

TEST_CASE("binomials and multinomials are exact") {
    CHECK(binomial(14, 9) == 2002);
    CHECK(binomial(9, 7) == 36);
    CHECK(binomial(13, 6) == 1716);
    CHECK(binomial(4, -1) == 0);
    CHECK(binomial(3, 5) == 0);
    std::vector<std::int64_t> parts{1, 1, 0};
    CHECK(multinomial(2, parts) == 2);
    CHECK(ipow(6, 10) == 60466176);
}

}  // TEST_SUITE

#include <cmath>
#include <vector>

#include "doctest.h"
#include "madapt/rng.hpp"
#include "madapt/tensor.hpp"

using namespace madapt;

namespace {
Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -2.0, double hi = 2.0) {
    Tensor t = Tensor::zeros({r, c});
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}
}  // namespace

TEST_CASE("tensor shape/data consistency is enforced") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
    CHECK_NOTHROW(Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}));
    CHECK(Tensor::scalar(5.0).item() == 5.0);
    CHECK(Tensor::zeros({3, 4}).size() == 12);
}

TEST_CASE("matmul: identity and projector") {
    Tensor i2({2, 2}, {1, 0, 0, 1});
    Tensor m({2, 2}, {1, 2, 3, 4});
    Tensor out = matmul(i2, m);
    CHECK(out.data == std::vector<double>{1, 2, 3, 4});

    Tensor proj({2, 2}, {1, 0, 0, 0});
    Tensor n({2, 2}, {5, 6, 7, 8});
    CHECK(matmul(proj, n).data == std::vector<double>{5, 6, 0, 0});
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4, 2});
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
    CHECK_THROWS_AS(matmul(Tensor::scalar(1.0), a), ShapeError);
}

TEST_CASE("softmax: uniform logits give the uniform distribution") {
    Tensor logits({1, 3}, {0, 0, 0});
    Tensor p = softmax_rows(logits, 1.0);
    for (double v : p.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax: shift invariance, [c, c+ln2] -> [1/3, 2/3]") {
    for (double c : {0.0, -7.5, 100.0, 3.25}) {
        Tensor logits({1, 2}, {c, c + std::log(2.0)});
        Tensor p = softmax_rows(logits, 1.0);
        CHECK(std::fabs(p.data[0] - 1.0 / 3.0) < 1e-12);
        CHECK(std::fabs(p.data[1] - 2.0 / 3.0) < 1e-12);
    }
}

TEST_CASE("softmax: temperature 2 on [1,2,3] matches high-precision values") {
    // Frozen from an arbitrary-precision evaluation (50 decimal digits).
    const double e0 = 1.8632372322584758728e-01;
    const double e1 = 3.0719588571849837377e-01;
    const double e2 = 5.0648039105565401119e-01;
    Tensor p = softmax_rows(Tensor({1, 3}, {1, 2, 3}), 2.0);
    CHECK(std::fabs(p.data[0] - e0) < 1e-12);
    CHECK(std::fabs(p.data[1] - e1) < 1e-12);
    CHECK(std::fabs(p.data[2] - e2) < 1e-12);
}

TEST_CASE("softmax rows sum to 1 and are shift invariant on random input") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed, "softmax-prop");
        Tensor logits = random_matrix(rng, 4, 6, -30.0, 30.0);
        const double shift = rng.uniform(-50.0, 50.0);
        Tensor p = softmax_rows(logits, 1.0);
        Tensor shifted = add_scalar(logits, shift);
        Tensor q = softmax_rows(shifted, 1.0);
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 6; ++c) s += p.data[r * 6 + c];
            CHECK(std::fabs(s - 1.0) < 1e-12);
        }
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            CHECK(std::fabs(p.data[i] - q.data[i]) < 1e-12);
        }
    }
}

TEST_CASE("softmax validates temperature") {
    CHECK_THROWS_AS(softmax_rows(Tensor::zeros({1, 2}), 0.0), ShapeError);
    CHECK_THROWS_AS(softmax_rows(Tensor::zeros({1, 2}), -1.0), ShapeError);
}

TEST_CASE("non-finite forward results are an error, not a value") {
    Tensor big({1, 2}, {1000.0, 1000.0});
    CHECK_THROWS_AS(exp_elem(big), NumericError);
    Tensor zero({1, 1}, {0.0});
    CHECK_THROWS_AS(log_elem(zero), NumericError);
}

TEST_CASE("elementwise ops and shape checks") {
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor b({2, 2}, {10, 20, 30, 40});
    CHECK(add(a, b).data == std::vector<double>{11, 22, 33, 44});
    CHECK(sub(b, a).data == std::vector<double>{9, 18, 27, 36});
    CHECK(mul(a, b).data == std::vector<double>{10, 40, 90, 160});
    CHECK(scale(a, 2.0).data == std::vector<double>{2, 4, 6, 8});
    CHECK(add_scalar(a, 1.0).data == std::vector<double>{2, 3, 4, 5});
    CHECK_THROWS_AS(add(a, Tensor::zeros({2, 3})), ShapeError);
    CHECK_THROWS_AS(mul(a, Tensor::zeros({4})), ShapeError);
}

TEST_CASE("relu and clamp_min") {
    Tensor a({1, 4}, {-2, -0.5, 0.5, 3});
    CHECK(relu(a).data == std::vector<double>{0, 0, 0.5, 3});
    CHECK(clamp_min(a, 0.0).data == std::vector<double>{0, 0, 0.5, 3});
    CHECK(clamp_min(a, -1.0).data == std::vector<double>{-1, -0.5, 0.5, 3});
}

TEST_CASE("reductions") {
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(mean_all(a).item() == doctest::Approx(3.5));
    CHECK(sum_all(a).item() == doctest::Approx(21.0));
    Tensor m = mean_rows(a);
    CHECK(m.shape == std::vector<std::size_t>{3});
    CHECK(m.data == std::vector<double>{2.5, 3.5, 4.5});
}

TEST_CASE("add_rowwise broadcasts the bias over rows") {
    Tensor a({2, 3}, {0, 0, 0, 1, 1, 1});
    Tensor bias({3}, {1, 2, 3});
    CHECK(add_rowwise(a, bias).data == std::vector<double>{1, 2, 3, 2, 3, 4});
    CHECK_THROWS_AS(add_rowwise(a, Tensor({2}, {1, 2})), ShapeError);
}

TEST_CASE("take_rows and concat_rows") {
    Tensor a({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor picked = take_rows(a, {2, 0, 2});
    CHECK(picked.data == std::vector<double>{5, 6, 1, 2, 5, 6});
    CHECK_THROWS_AS(take_rows(a, {3}), ShapeError);

    Tensor b({1, 2}, {7, 8});
    Tensor cat = concat_rows(a, b);
    CHECK(cat.shape == std::vector<std::size_t>{4, 2});
    CHECK(cat.data == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_THROWS_AS(concat_rows(a, Tensor::zeros({1, 3})), ShapeError);
}

TEST_CASE("one_hot_rows builds constant indicator rows") {
    Tensor oh = one_hot_rows({2, 0}, 3);
    CHECK(oh.data == std::vector<double>{0, 0, 1, 1, 0, 0});
    CHECK(!oh.tracked());
    CHECK_THROWS_AS(one_hot_rows({3}, 3), ShapeError);
    CHECK_THROWS_AS(one_hot_rows({-1}, 3), ShapeError);
}

TEST_CASE("mean_row_dot averages per-row dot products") {
    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor w({2, 2}, {1, 0, 0, 1});
    CHECK(mean_row_dot(a, w).item() == doctest::Approx(2.5));  // (1 + 4) / 2
}

TEST_CASE("detach produces an untracked copy with identical values") {
    Tape tape;
    Tensor a = tape.leaf(Tensor({2, 2}, {1, 2, 3, 4}));
    Tensor d = detach(a);
    CHECK(!d.tracked());
    CHECK(d.data == a.data);
}

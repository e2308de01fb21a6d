#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leafnet/rng.hpp"
#include "leafnet/tensor.hpp"

using namespace leafnet;

namespace {

// independent triple-loop oracle
template <typename T>
TensorT<T> matmul_oracle(const TensorT<T>& a, const TensorT<T>& b) {
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  TensorT<T> c({m, n}, T{0});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c.at(i, j) += a.at(i, p) * b.at(p, j);
  return c;
}

TensorD random_int_tensor(Rng& rng, Shape shape, int lo = -4, int hi = 4) {
  TensorD t(shape);
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<double>(lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))));
  return t;
}

}  // namespace

TEST_CASE("tensor construction enforces the invariants") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.at(1, 2) == 6.0f);

  CHECK_THROWS_AS(Tensor(Shape{}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f}), ShapeError);
}

TEST_CASE("matmul identity case") {
  Tensor identity({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor x({3, 4});
  Rng rng(7);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.uniform(-2, 2));
  Tensor y = matmul(identity, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("matmul annihilator case") {
  Tensor zeros({2, 3}, 0.0f);
  Tensor b({3, 2}, {5, 1, -2, 0, 7, 3});
  Tensor c = matmul(zeros, b);
  CHECK(c.shape() == Shape{2, 2});
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == 0.0f);
}

TEST_CASE("matmul matches the triple-loop oracle on the worked example") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = matmul(a, b);
  CHECK(c.at(0, 0) == 58.0f);
  CHECK(c.at(0, 1) == 64.0f);
  CHECK(c.at(1, 0) == 139.0f);
  CHECK(c.at(1, 1) == 154.0f);

  Tensor oracle = matmul_oracle(a, b);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == oracle[i]);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tensor a({2, 3});
  Tensor b({4, 2});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("[2,3]"), ShapeError);
  try {
    matmul(a, b);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("[4,2]") != std::string::npos);
  }
}

TEST_CASE("matmul leaves its inputs unmodified") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {5, 6, 7, 8});
  const std::vector<float> a_before = a.values();
  const std::vector<float> b_before = b.values();
  (void)matmul(a, b);
  CHECK(a.values() == a_before);
  CHECK(b.values() == b_before);
}

TEST_CASE("matmul is associative on integer tensors in 64-bit mode") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.index(4), k = 1 + rng.index(4), n = 1 + rng.index(4),
                      q = 1 + rng.index(4);
    TensorD a = random_int_tensor(rng, {m, k});
    TensorD b = random_int_tensor(rng, {k, n});
    TensorD c = random_int_tensor(rng, {n, q});
    TensorD left = matmul(matmul(a, b), c);
    TensorD right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) CHECK(left[i] == right[i]);
  }
}

TEST_CASE("elementwise add identity and mul oracle") {
  Tensor t({2, 2}, {1, -2, 3, 0.5f});
  Tensor zeros({2, 2}, 0.0f);
  Tensor same = add(t, zeros);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(same[i] == t[i]);

  Tensor halved = scale(Tensor({2}, {2, 4}), 0.5f);
  CHECK(halved[0] == 1.0f);
  CHECK(halved[1] == 2.0f);

  Tensor prod = mul(Tensor({2}, {1, 2}), Tensor({2}, {3, 4}));
  CHECK(prod[0] == 3.0f);
  CHECK(prod[1] == 8.0f);

  CHECK_THROWS_AS(add(Tensor({2}), Tensor({3})), ShapeError);
}

TEST_CASE("reductions") {
  CHECK(sum(Tensor({4}, 1.0f)) == 4.0f);
  CHECK(argmax(Tensor({3}, {0.1f, 0.7f, 0.2f})) == 1);

  Tensor m({2, 2}, {1, 3, 5, 7});
  Tensor col_means = mean(m, 0);
  CHECK(col_means.shape() == Shape{2});
  CHECK(col_means[0] == 3.0f);
  CHECK(col_means[1] == 5.0f);

  CHECK(max_value(Tensor({3}, {-5, -2, -9})) == -2.0f);
  CHECK_THROWS_AS(sum(m, 2), ShapeError);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax(Tensor({4}, {1, 3, 3, 3})) == 1);
  const auto rows = argmax(Tensor({2, 2}, {2, 2, 0, 1}), 1);
  CHECK(rows[0] == 0);
  CHECK(rows[1] == 1);
}

TEST_CASE("reshape round-trips whenever volumes agree") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t a = 1 + rng.index(4), b = 1 + rng.index(4), c = 1 + rng.index(4);
    Tensor t({a, b, c});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform());
    Tensor back = t.reshaped({a * b * c}).reshaped({a, b, c});
    CHECK(back.shape() == t.shape());
    CHECK(back.values() == t.values());
  }
  CHECK_THROWS_AS(Tensor({2, 2}).reshaped({3}), ShapeError);
}

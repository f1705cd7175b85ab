#pragma once

// Sobol low-discrepancy sequences (Joe-Kuo direction numbers, dimensions up
// to 16) with an optional random shift, used for multi-start points and the
// globalized optimizer's candidate stream.

#include <cstdint>
#include <vector>

#include "gmmiter/numerics.hpp"
#include "gmmiter/rng.hpp"

namespace gmmiter {

struct PointSet {
    int dim = 0;
    int count = 0;
    std::vector<Vector> points;  // each in [0,1)^dim
    Vector shift;                // u applied coordinate-wise, zero if unshifted
    std::uint64_t seed = 0;      // seed behind the shift, 0 if unshifted
};

namespace detail {

// Primitive polynomial degree s, coefficient bits a, and initial direction
// integers m for dimensions 2..16 (dimension 1 is the van der Corput base-2
// sequence). Values from the Joe-Kuo "new-joe-kuo-6" table.
struct SobolDirection {
    int s;
    std::uint32_t a;
    std::uint32_t m[6];
};

inline const SobolDirection kSobolDirections[15] = {
    {1, 0, {1, 0, 0, 0, 0, 0}},       // dim 2
    {2, 1, {1, 3, 0, 0, 0, 0}},       // dim 3
    {3, 1, {1, 3, 1, 0, 0, 0}},       // dim 4
    {3, 2, {1, 1, 1, 0, 0, 0}},       // dim 5
    {4, 1, {1, 1, 3, 3, 0, 0}},       // dim 6
    {4, 4, {1, 3, 5, 13, 0, 0}},      // dim 7
    {5, 2, {1, 1, 5, 5, 17, 0}},      // dim 8
    {5, 4, {1, 1, 5, 5, 5, 0}},       // dim 9
    {5, 7, {1, 1, 7, 11, 19, 0}},     // dim 10
    {5, 11, {1, 1, 5, 1, 1, 0}},      // dim 11
    {5, 13, {1, 1, 1, 3, 11, 0}},     // dim 12
    {5, 14, {1, 3, 5, 5, 31, 0}},     // dim 13
    {6, 1, {1, 3, 3, 9, 7, 49}},      // dim 14
    {6, 13, {1, 1, 1, 15, 21, 21}},   // dim 15
    {6, 16, {1, 3, 1, 13, 27, 49}},   // dim 16
};

inline constexpr int kSobolBits = 32;
inline constexpr int kSobolMaxDim = 16;

// Direction integers v_1..v_32 for one coordinate, scaled so that
// point = state * 2^-32.
inline std::vector<std::uint32_t> sobol_direction_integers(int coordinate) {
    std::vector<std::uint32_t> v(kSobolBits);
    if (coordinate == 0) {
        for (int j = 0; j < kSobolBits; ++j) v[j] = 1u << (31 - j);
        return v;
    }
    const SobolDirection& dir = kSobolDirections[coordinate - 1];
    const int s = dir.s;
    std::vector<std::uint32_t> m(kSobolBits);
    for (int j = 0; j < s; ++j) m[j] = dir.m[j];
    for (int j = s; j < kSobolBits; ++j) {
        std::uint32_t mj = m[j - s] ^ (m[j - s] << s);
        for (int i = 1; i < s; ++i) {
            if ((dir.a >> (s - 1 - i)) & 1u) mj ^= m[j - i] << i;
        }
        m[j] = mj;
    }
    for (int j = 0; j < kSobolBits; ++j) v[j] = m[j] << (31 - j);
    return v;
}

inline int rightmost_zero_bit(std::uint32_t n) {
    int c = 0;
    while (n & 1u) {
        n >>= 1;
        ++c;
    }
    return c;
}

}  // namespace detail

// First n Sobol points in [0,1)^dim, gray-code order. The index-0 all-zeros
// point is skipped: the first emitted point is (0.5, ..., 0.5).
inline PointSet sobol(int dim, int n) {
    if (dim < 1 || dim > detail::kSobolMaxDim) {
        throw InvalidInputError("sobol: dim must be between 1 and 16");
    }
    if (n < 1) throw InvalidInputError("sobol: n must be at least 1");

    std::vector<std::vector<std::uint32_t>> v(dim);
    for (int c = 0; c < dim; ++c) v[c] = detail::sobol_direction_integers(c);

    PointSet ps;
    ps.dim = dim;
    ps.count = n;
    ps.points.reserve(n);
    ps.shift = Vector::Zero(dim);

    std::vector<std::uint32_t> state(dim, 0u);
    for (int k = 1; k <= n; ++k) {
        const int c = detail::rightmost_zero_bit(static_cast<std::uint32_t>(k - 1));
        Vector point(dim);
        for (int j = 0; j < dim; ++j) {
            state[j] ^= v[j][c];
            point(j) = static_cast<double>(state[j]) * 0x1.0p-32;
        }
        ps.points.push_back(std::move(point));
    }
    return ps;
}

// Coordinate-wise (s + u) mod 1 with a single seeded u ~ U[0,1)^dim.
inline PointSet random_shift(const PointSet& ps, std::uint64_t seed) {
    Rng rng(seed);
    Vector u(ps.dim);
    for (int j = 0; j < ps.dim; ++j) u(j) = rng.u01();

    PointSet out;
    out.dim = ps.dim;
    out.count = ps.count;
    out.seed = seed;
    out.shift = u;
    out.points.reserve(ps.points.size());
    for (const Vector& p : ps.points) {
        Vector q(ps.dim);
        for (int j = 0; j < ps.dim; ++j) {
            double x = p(j) + u(j);
            if (x >= 1.0) x -= 1.0;
            q(j) = x;
        }
        out.points.push_back(std::move(q));
    }
    return out;
}

// Affine map of unit-box points into [lower, upper].
inline std::vector<Vector> map_to_box(const PointSet& ps, const Vector& lower,
                                      const Vector& upper) {
    if (lower.size() != ps.dim || upper.size() != ps.dim) {
        throw InvalidInputError("map_to_box: bounds dimension mismatch");
    }
    for (int j = 0; j < ps.dim; ++j) {
        if (!(lower(j) < upper(j))) throw InvalidInputError("map_to_box: inverted bounds");
    }
    std::vector<Vector> out;
    out.reserve(ps.points.size());
    for (const Vector& p : ps.points) {
        out.push_back(lower + p.cwiseProduct(upper - lower));
    }
    return out;
}

}  // namespace gmmiter

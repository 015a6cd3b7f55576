#pragma once

#include <random>

#include "qcalab/qca.hpp"

namespace qcalab::testutil {

inline Mat random_mat(int n, FieldTag f, std::mt19937_64& rng, int radius = 3) {
    std::uniform_int_distribution<int> d(-radius, radius);
    Mat m(n, n, f);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = Scalar::from_int(d(rng), f);
    return m;
}

inline Mat random_invertible(int n, FieldTag f, std::mt19937_64& rng, int radius = 3) {
    for (;;) {
        Mat m = random_mat(n, f, rng, radius);
        if (is_invertible(m)) return m;
    }
}

inline Element random_element(const SpinSystem& sys, const std::vector<int>& support, FieldTag f,
                              std::mt19937_64& rng, int radius = 3) {
    std::int64_t d = 1;
    for (int s : support) d *= sys.dim(s);
    Mat m(static_cast<int>(d), static_cast<int>(d), f);
    std::uniform_int_distribution<int> dist(-radius, radius);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.at(i, j) = Scalar::from_int(dist(rng), f);
    return Element(sys, support, std::move(m));
}

// Single layer of inner gates over random adjacent blocks.
inline Homo random_circuit_layer(const SpinSystem& sys, FieldTag f, std::mt19937_64& rng,
                                 int max_block = 2) {
    std::vector<GateSpec> layer;
    int s = 0;
    const int n = sys.sites();
    while (s < n) {
        int len = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_block));
        len = std::min(len, n - s);
        GateSpec g;
        for (int k = 0; k < len; ++k) g.block.push_back(s + k);
        std::int64_t bd = 1;
        for (int k = 0; k < len; ++k) bd *= sys.dim(s + k);
        g.kind = GateKind::Inner;
        g.g = random_invertible(static_cast<int>(bd), f, rng, 2);
        layer.push_back(std::move(g));
        s += len;
    }
    return circuit_single_layer(sys, std::move(layer), f);
}

}  // namespace qcalab::testutil

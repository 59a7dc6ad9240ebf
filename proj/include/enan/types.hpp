#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace enan {

using PointId = std::int32_t;
using ClassId = std::int32_t;

// Row-major matrix of feature vectors. Rows are points, columns are features.
class PointMatrix {
public:
    PointMatrix() = default;
    PointMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Neighbor {
    PointId id = -1;
    double distance = 0.0;  // Euclidean
};

// Sorted by (distance, id) ascending; ids distinct.
using NeighborList = std::vector<Neighbor>;

// Canonical distance: all ordering, tie-breaking and threshold comparisons
// across the library use this exact double value.
inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

// (distance, id) ordering shared by every neighbor computation.
inline bool neighbor_before(double da, PointId ia, double db, PointId ib) {
    return da < db || (da == db && ia < ib);
}

}  // namespace enan

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace spiketext {

// Sparse documents x terms storage; row-major so per-document slices are
// contiguous ranges.
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int32_t>;

// Connection mask, 1 = keep / 0 = pruned. Row-major so one neuron's incoming
// mask is a contiguous row.
using MaskMatrix = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace spiketext

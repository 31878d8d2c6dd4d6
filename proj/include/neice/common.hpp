#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace neice {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Exit-code mapping for the CLI: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace neice

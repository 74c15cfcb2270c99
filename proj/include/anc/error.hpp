#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class IoErrorKind {
    missing_file,
    unwritable_path,
    non_mono,
    unsupported_bit_depth,
    malformed,
    empty_signal,
    ragged_columns,
};

class IoError : public Error {
public:
    IoError(IoErrorKind kind, std::string path, const std::string& what)
        : Error(what), kind_(kind), path_(std::move(path)) {}

    IoErrorKind kind() const noexcept { return kind_; }
    const std::string& path() const noexcept { return path_; }

private:
    IoErrorKind kind_;
    std::string path_;
};

/// A coefficient became non-finite while processing `sample_index`.
class DivergenceError : public Error {
public:
    explicit DivergenceError(std::size_t sample_index)
        : Error("filter diverged at sample " + std::to_string(sample_index)),
          sample_index_(sample_index) {}

    std::size_t sample_index() const noexcept { return sample_index_; }

private:
    std::size_t sample_index_;
};

}  // namespace anc

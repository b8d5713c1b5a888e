#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ndnf {

// Input vector or matrix has the wrong width.
class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Value outside the domain an operation accepts (non-finite, empty dataset, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A node exceeded the enumeration cap or the per-node search deadline.
class budget_exceeded : public std::runtime_error {
public:
    budget_exceeded(const std::string& what, std::size_t node)
        : std::runtime_error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

class training_diverged : public std::runtime_error {
public:
    training_diverged(const std::string& what, std::size_t epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// Weight tensor could not be read as a rule (value off the {-6,0,6} lattice).
class translation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class evaluation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ndnf

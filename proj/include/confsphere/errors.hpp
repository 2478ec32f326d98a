#pragma once

#include <stdexcept>
#include <string>

namespace confsphere {

// Thrown when a check's stated hypothesis fails (e.g. a drift constant below
// the level the inequality requires). Distinct from invalid_argument so
// callers can tell "you broke the contract" from "the hypothesis does not
// hold for this input".
class hypothesis_violation : public std::runtime_error {
public:
    explicit hypothesis_violation(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a deterministic search fails to find an admissible value
// (regular-value selection).
class selection_failure : public std::runtime_error {
public:
    explicit selection_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace confsphere

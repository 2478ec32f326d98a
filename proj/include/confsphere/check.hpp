#pragma once

// Common shape for "lhs <= rhs" verifications: every bound check in the
// toolkit reports both sides, the slack, and a verdict at an explicit
// tolerance, so reports stay auditable.

#include <string>

namespace confsphere {

struct InequalityCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;      // rhs - lhs
    double tolerance = 0.0;  // verdict is slack >= -tolerance
    bool holds = false;
};

inline InequalityCheck make_check(std::string name, double lhs, double rhs, double tolerance = 0.0) {
    InequalityCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    c.tolerance = tolerance;
    c.holds = c.slack >= -tolerance;
    return c;
}

}  // namespace confsphere

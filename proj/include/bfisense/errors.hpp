#pragma once

#include <stdexcept>
#include <string>

namespace bfisense {

// Caller passed something outside the documented domain (shape, range, NaN).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input is well-formed but the quantity asked for is not uniquely defined
// there (zero channel, repeated singular values, 0/0 in a closed form).
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Exhaustive search would exceed its combinatorial budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace bfisense

#pragma once

#include <stdexcept>

namespace ggsep {

/// Integration or round-off failure: the computation ran but the result
/// does not meet its accuracy contract (e.g. symplecticity defect).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its budget without reaching tolerance.
class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ggsep

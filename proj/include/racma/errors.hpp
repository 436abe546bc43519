#pragma once

#include <stdexcept>
#include <string>

namespace racma
{
    /// Base class of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A precondition on an argument was violated (sizes, ranges, unknown names).
    class InvalidArgument : public Error
    {
    public:
        using Error::Error;
    };

    /// An objective value or update direction was NaN or infinite.
    class InvalidEvaluation : public Error
    {
    public:
        using Error::Error;
    };

    /// A covariance-like matrix lost positive definiteness or became non-finite.
    class NumericalDegeneracy : public Error
    {
    public:
        using Error::Error;
    };

    /// An estimator was read before it carried any information (zero variance everywhere).
    class UndefinedEstimate : public Error
    {
    public:
        using Error::Error;
    };
}

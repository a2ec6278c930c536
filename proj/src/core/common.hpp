#ifndef EPF_CORE_COMMON_HPP
#define EPF_CORE_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace epf
{

/// Error categories. Mirrored one-to-one by the C API status codes, so the
/// numeric values are part of the shared-library contract and must not change.
enum class ErrorCode : int
{
    Ok              = 0,
    InvalidArgument = 1,
    Parse           = 2,
    Domain          = 3,
    Numeric         = 4,
    Io              = 5,
    Degenerate      = 6,
    Singular        = 7,
};

class EpfError : public std::runtime_error
{
public:
    EpfError(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg)
        , m_code(code)
    {
    }
    ErrorCode code() const
    {
        return m_code;
    }

private:
    ErrorCode m_code;
};

/// Raised when a collapsed trajectory has I^col = 0 somewhere on the grid.
/// Carries the earliest offending grid index so callers can trim.
class DegeneracyError : public EpfError
{
public:
    DegeneracyError(int index, const std::string& msg)
        : EpfError(ErrorCode::Degenerate, msg)
        , m_index(index)
    {
    }
    int index() const
    {
        return m_index;
    }

private:
    int m_index;
};

/// Raised when the multiregional interaction matrix cannot be inverted.
/// Carries the grid index at which the conditioning check failed.
class SingularMatrixError : public EpfError
{
public:
    SingularMatrixError(int index, const std::string& msg)
        : EpfError(ErrorCode::Singular, msg)
        , m_index(index)
    {
    }
    int index() const
    {
        return m_index;
    }

private:
    int m_index;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg)
{
    throw EpfError(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg)
{
    if (!cond) {
        fail(code, msg);
    }
}

} // namespace epf

#endif // EPF_CORE_COMMON_HPP

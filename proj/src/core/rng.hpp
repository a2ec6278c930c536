#ifndef EPF_CORE_RNG_HPP
#define EPF_CORE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace epf
{

/// Seeded random stream with a pinned bit-to-double mapping.
///
/// The standard distribution adaptors are not guaranteed to produce the same
/// sequence across library implementations, so doubles are derived from the
/// mt19937_64 output directly. Artifacts generated from a seed are therefore
/// reproducible independently of the C++ standard library in use.
class Rng
{
public:
    explicit Rng(std::uint64_t seed)
        : m_engine(seed)
    {
    }

    std::uint64_t next_u64()
    {
        return m_engine();
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform()
    {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi)
    {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller (polar-free form, deterministic order).
    double normal()
    {
        if (m_has_spare) {
            m_has_spare = false;
            return m_spare;
        }
        // u1 in (0,1] so the log is finite.
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        m_spare = mag * std::sin(2.0 * M_PI * u2);
        m_has_spare = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 m_engine;
    double m_spare = 0.0;
    bool m_has_spare = false;
};

} // namespace epf

#endif // EPF_CORE_RNG_HPP

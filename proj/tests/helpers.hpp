#ifndef EPF_TESTS_HELPERS_HPP
#define EPF_TESTS_HELPERS_HPP

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "core/common.hpp"

namespace epf_test
{

/// Unique scratch directory removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        m_path = base / ("epf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const
    {
        return m_path;
    }
    std::string file(const std::string& name) const
    {
        return (m_path / name).string();
    }

private:
    std::filesystem::path m_path;
};

inline std::string write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

/// Runs `fn` and reports the EpfError code it throws, or Ok if it returns.
template <typename Fn>
epf::ErrorCode thrown_code(Fn&& fn)
{
    try
    {
        fn();
    }
    catch (const epf::EpfError& e)
    {
        return e.code();
    }
    return epf::ErrorCode::Ok;
}

} // namespace epf_test

#endif // EPF_TESTS_HELPERS_HPP

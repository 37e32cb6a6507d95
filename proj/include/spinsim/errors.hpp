#pragma once
#include <stdexcept>
#include <string>

namespace spinsim {

// Machine-readable failure. `code` is stable for scripting; `what()` is for humans.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* DIM_TOO_LARGE      = "DIM_TOO_LARGE";
inline constexpr const char* BAD_ARGUMENT       = "BAD_ARGUMENT";
inline constexpr const char* NON_HERMITIAN      = "NON_HERMITIAN";
inline constexpr const char* BAD_COUPLING       = "BAD_COUPLING";
inline constexpr const char* SCHEDULE_OVERLAP   = "SCHEDULE_OVERLAP";
inline constexpr const char* SCHEDULE_BOUNDS    = "SCHEDULE_BOUNDS";
inline constexpr const char* SNAP_TOLERANCE     = "SNAP_TOLERANCE";
inline constexpr const char* NO_PEAK            = "NO_PEAK";
inline constexpr const char* NO_DECAY           = "NO_DECAY";
inline constexpr const char* NONUNIFORM_GRID    = "NONUNIFORM_GRID";
inline constexpr const char* FINITE_WIDTH_UNSUPPORTED = "FINITE_WIDTH_UNSUPPORTED";
inline constexpr const char* IO_ERROR           = "IO_ERROR";
inline constexpr const char* PARSE_ERROR        = "PARSE_ERROR";
inline constexpr const char* EMPTY_DISTRIBUTION = "EMPTY_DISTRIBUTION";
} // namespace errc

} // namespace spinsim

#pragma once

#include <stdexcept>
#include <string>

namespace tcfp {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedHeader : std::runtime_error {
    explicit MalformedHeader(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnsupportedEncoding : std::runtime_error {
    explicit UnsupportedEncoding(const std::string& msg) : std::runtime_error(msg) {}
};

struct SignalTooShort : std::runtime_error {
    explicit SignalTooShort(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientPatches : std::runtime_error {
    explicit InsufficientPatches(const std::string& msg) : std::runtime_error(msg) {}
};

struct DuplicateSongId : std::runtime_error {
    explicit DuplicateSongId(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatVersionMismatch : std::runtime_error {
    explicit FormatVersionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutOfBand : std::runtime_error {
    explicit OutOfBand(const std::string& msg) : std::runtime_error(msg) {}
};

struct SilentSignal : std::runtime_error {
    explicit SilentSignal(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace tcfp

#pragma once

#include <stdexcept>
#include <string>

namespace ahe {

// Base error; `module()` names the library layer the failure came from.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

class DegenerateMetric : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error("metric_library", what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key_path, const std::string& what)
        : Error("cli_report", key_path + ": " + what), key_path_(key_path) {}
    const std::string& key_path() const { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace ahe

#pragma once

#include <stdexcept>
#include <string>

namespace crisis {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file (corpus TSV, params file, config).
class ParseError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Remote endpoint rejected our credentials; annotation runs abort on this.
class AuthError : public Error {
public:
    using Error::Error;
};

// Training diverged (non-finite loss or parameters).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace crisis

#pragma once

#include <stdexcept>
#include <string>

namespace stap {

// Base of every error the library throws. `kind()` is a stable machine-readable
// tag used by the HTTP layer and the CLIs.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
    virtual const char* kind() const noexcept { return "error"; }
};

#define STAP_DEFINE_ERROR(Name, tag)                                  \
    class Name : public Error {                                       \
    public:                                                           \
        using Error::Error;                                           \
        const char* kind() const noexcept override { return tag; }    \
    };

// Bad input file: malformed row, missing column, unparseable JSON.
STAP_DEFINE_ERROR(ParseError, "parse_error")
// Input violates a documented domain constraint.
STAP_DEFINE_ERROR(ValidationError, "validation_error")
// Missing executable, unusable checker, bad settings.
STAP_DEFINE_ERROR(ConfigError, "config_error")
STAP_DEFINE_ERROR(NotFoundError, "not_found")
STAP_DEFINE_ERROR(ConflictError, "conflict")
STAP_DEFINE_ERROR(CredentialError, "credential_error")
STAP_DEFINE_ERROR(TransportError, "transport_error")
STAP_DEFINE_ERROR(EmptyResponseError, "empty_response")

#undef STAP_DEFINE_ERROR

} // namespace stap

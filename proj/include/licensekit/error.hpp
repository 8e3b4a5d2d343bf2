// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 licensekit contributors

#pragma once

#include <stdexcept>
#include <string>

namespace licensekit {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file or payload does not follow its documented format.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Missing or inconsistent configuration (registry, credentials, ids).
class ConfigError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Write rejected because the target is already in a final state.
class ConflictError : public Error {
public:
    using Error::Error;
};

/// Connection-level failure talking to an endpoint. Retriable.
class TransportError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public TransportError {
public:
    using TransportError::TransportError;
};

/// Endpoint answered, but not with something we can use.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, int status = 0, std::string body_excerpt = {})
        : Error(what), status_(status), body_excerpt_(std::move(body_excerpt)) {}

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

private:
    int status_;
    std::string body_excerpt_;
};

class ReplayMissError : public Error {
public:
    explicit ReplayMissError(std::string fingerprint)
        : Error("replay store has no entry for fingerprint " + fingerprint),
          fingerprint_(std::move(fingerprint)) {}

    const std::string& fingerprint() const noexcept { return fingerprint_; }

private:
    std::string fingerprint_;
};

/// Statistic undefined for the given data (zero spread, all-zero differences).
class DegenerateError : public Error {
public:
    using Error::Error;
};

} // namespace licensekit

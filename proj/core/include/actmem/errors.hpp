#pragma once

#include <stdexcept>
#include <string>

namespace actmem {

// Base of the engine error hierarchy. Subtypes map onto the CLI exit codes:
// provider/transport failures -> 1, user/input errors -> 2, corruption -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid EngineConfig; names the first violated field.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& msg)
        : Error("config field '" + field + "': " + msg), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Retryable network/provider failure; raised after the retry budget is spent.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg, int attempts = 1)
        : Error(msg), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

// Non-retryable provider rejection (policy refusal, bad request, auth).
class ProviderRefusal : public Error {
    using Error::Error;
};

class DimensionMismatch : public Error {
    using Error::Error;
};

class ZeroVector : public Error {
    using Error::Error;
};

class NonFiniteScore : public Error {
    using Error::Error;
};

// Provider reply that cannot be parsed under the strict line contracts.
class MalformedReply : public Error {
    using Error::Error;
};

class IoError : public Error {
    using Error::Error;
};

class SerializationError : public Error {
    using Error::Error;
};

// Store written by a newer (or unknown) format version.
class VersionMismatch : public Error {
    using Error::Error;
};

// Structurally damaged store file; the message carries the offending record.
class CorruptFile : public Error {
    using Error::Error;
};

// Loaded data violates a graph invariant (e.g. an edge with a missing fact).
class IntegrityError : public Error {
    using Error::Error;
};

// Evidence locator that does not resolve against the sample dialogue.
class UnresolvableEvidence : public Error {
    using Error::Error;
};

}  // namespace actmem

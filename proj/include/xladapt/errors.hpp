#pragma once

#include <stdexcept>

namespace xladapt {

// Error taxonomy mirrored by the CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Terminal client failure (retries exhausted or non-retryable).
struct ClientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Retryable client failure; the mining retry loop absorbs these.
struct ClientTransientError : ClientError {
  using ClientError::ClientError;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xladapt

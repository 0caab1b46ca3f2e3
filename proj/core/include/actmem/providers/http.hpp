#pragma once

#include "actmem/config.hpp"
#include "actmem/providers.hpp"

namespace actmem::providers {

// OpenAI-compatible JSON-over-HTTP providers. The endpoint and model names
// come from ProviderConfig; the API key is taken from the config's api_key
// field, which only apply_env_overrides (ACTMEM_API_KEY) ever fills — keys
// are never read from or written to files.
//
// chat  -> POST {base}/chat/completions  (messages array)
// embed -> POST {base}/embeddings        (input list; vectors renormalized)
// nll   -> POST {base}/completions       (echo + logprobs; target tokens
//          are the echoed tokens overlapping the target suffix)
//
// Transport failures, HTTP 429 and 5xx responses are retried with bounded
// exponential backoff, at most 3 attempts, then raise TransportError. Other
// 4xx responses raise ProviderRefusal immediately. At most
// config.max_in_flight requests run concurrently across all three
// providers. Token usage is taken from response metadata when present.
ProviderSuite make_http_suite(const ProviderConfig& config);

}  // namespace actmem::providers

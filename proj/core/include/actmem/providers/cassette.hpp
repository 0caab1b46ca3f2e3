#pragma once

#include <string>

#include "actmem/providers.hpp"

namespace actmem::providers {

// Record/replay for offline re-verification of runs against live
// endpoints.
//
// Cassette format: JSONL, one {"kind", "request", "response"} object per
// line, appended in completion order. Requests are canonicalized (chat:
// system/user/temperature; embed: texts; nll: context/target) so a replay
// matches on content, not on call order. Responses carry only model output
// — no credentials and no usage metadata ever land in a cassette.

// Wraps a live suite so every successful provider call is appended to the
// cassette file. The inner suite's call log and limits are kept.
ProviderSuite wrap_recording(const ProviderSuite& inner, const std::string& cassette_path);

// Serves recorded responses by request content; repeated identical
// requests consume recordings in file order. A request with no remaining
// recording raises TransportError. Replay suites are deterministic and
// approximate token usage from text (flagged inexact).
ProviderSuite make_replay_suite(const std::string& cassette_path);

}  // namespace actmem::providers

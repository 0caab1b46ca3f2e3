#include "actmem/providers.hpp"

#include <algorithm>

namespace actmem {

std::uint64_t CallLog::record(CallKind kind, const TokenUsage& usage) {
    std::lock_guard lock(mu_);
    CallRecord rec{next_++, kind, usage};
    records_.push_back(rec);
    return rec.id;
}

std::uint64_t CallLog::next_id() const {
    std::lock_guard lock(mu_);
    return next_;
}

std::size_t CallLog::count(CallKind kind, std::uint64_t from, std::uint64_t to) const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [&](const CallRecord& r) {
            return r.kind == kind && r.id >= from && r.id < to;
        }));
}

std::vector<std::uint64_t> CallLog::ids(CallKind kind, std::uint64_t from,
                                        std::uint64_t to) const {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> out;
    for (const CallRecord& r : records_)
        if (r.kind == kind && r.id >= from && r.id < to) out.push_back(r.id);
    std::sort(out.begin(), out.end());
    return out;
}

TokenUsage CallLog::usage_in(std::uint64_t from, std::uint64_t to) const {
    std::lock_guard lock(mu_);
    TokenUsage total{0, 0, true};
    for (const CallRecord& r : records_)
        if (r.id >= from && r.id < to) total += r.usage;
    return total;
}

std::vector<CallRecord> CallLog::snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
}

}  // namespace actmem

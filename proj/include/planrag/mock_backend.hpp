#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "planrag/orchestrator.hpp"

namespace planrag::orchestrator {

struct ScriptEntry {
    LmMode mode = LmMode::Plan;
    std::string text;
};

/// Deterministic backend replaying a fixed script. Entries are consumed in
/// order; a request whose mode differs from the next entry's tag raises
/// ModeMismatch, and requests past the end raise ScriptExhausted.
class MockLmBackend final : public LmBackend {
public:
    explicit MockLmBackend(std::vector<ScriptEntry> script)
        : script_(std::move(script)) {}

    LmResponse generate(const LmRequest& request) override;

    int calls_made() const;
    int plan_calls() const;
    int answer_calls() const;
    size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<ScriptEntry> script_;
    size_t cursor_ = 0;
    int plan_calls_ = 0;
    int answer_calls_ = 0;
};

}  // namespace planrag::orchestrator

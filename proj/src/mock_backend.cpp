#include "planrag/mock_backend.hpp"

namespace planrag::orchestrator {

LmResponse MockLmBackend::generate(const LmRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (cursor_ >= script_.size()) {
        throw ScriptExhausted("mock script exhausted after " +
                              std::to_string(script_.size()) + " entries");
    }
    const ScriptEntry& entry = script_[cursor_];
    if (entry.mode != request.mode) {
        throw ModeMismatch("script entry " + std::to_string(cursor_) +
                           " is tagged " + std::string(lm_mode_name(entry.mode)) +
                           " but the request is " +
                           std::string(lm_mode_name(request.mode)));
    }
    ++cursor_;
    if (request.mode == LmMode::Plan) {
        ++plan_calls_;
    } else {
        ++answer_calls_;
    }
    return LmResponse{entry.text, FinishReason::Stop};
}

int MockLmBackend::calls_made() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return plan_calls_ + answer_calls_;
}

int MockLmBackend::plan_calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return plan_calls_;
}

int MockLmBackend::answer_calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return answer_calls_;
}

size_t MockLmBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return script_.size() - cursor_;
}

}  // namespace planrag::orchestrator

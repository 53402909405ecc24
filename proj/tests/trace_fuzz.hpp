#pragma once

#include <random>
#include <string>

#include "planrag/segment_grammar.hpp"

namespace planrag::testing {

// Deterministic generator of valid traces for round-trip properties. The
// payload alphabet avoids '<' and '[' so generated payloads can never be
// mistaken for markers.
inline std::string random_payload(std::mt19937& rng, int min_len, int max_len) {
    static constexpr const char* kAlphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
        " .,:;'()!?-]%";
    std::uniform_int_distribution<int> len_dist(min_len, max_len);
    std::uniform_int_distribution<size_t> ch_dist(0, std::char_traits<char>::length(kAlphabet) - 1);
    int len = len_dist(rng);
    std::string out;
    out.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) out.push_back(kAlphabet[ch_dist(rng)]);
    return out;
}

inline grammar::GenerationTrace random_trace(std::mt19937& rng) {
    std::uniform_int_distribution<int> percent(0, 99);
    grammar::GenerationTrace trace;
    if (percent(rng) < 15) {
        trace.needs_retrieval = false;
        grammar::Segment seg;
        if (percent(rng) < 80) seg.answer = random_payload(rng, 1, 40);
        trace.segments.push_back(seg);
        return trace;
    }
    std::uniform_int_distribution<int> seg_count(1, 4);
    int n = seg_count(rng);
    for (int i = 0; i < n; ++i) {
        grammar::Segment seg;
        if (percent(rng) < 30) seg.preamble = random_payload(rng, 1, 30);
        seg.plan = random_payload(rng, 1, 25);
        if (percent(rng) < 50) seg.coarse_paragraph = random_payload(rng, 0, 80);
        if (percent(rng) < 60) seg.fine_paragraph = random_payload(rng, 0, 60);
        if (percent(rng) < 90) seg.answer = random_payload(rng, 0, 60);
        trace.segments.push_back(std::move(seg));
    }
    if (percent(rng) < 25) trace.combine_answer = random_payload(rng, 1, 30);
    return trace;
}

}  // namespace planrag::testing

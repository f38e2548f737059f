#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmetid/types.hpp"

namespace helmetid {

// Drops tracking samples and detections recorded before the snap.
// Play action (and therefore usable motion signal) starts at the snap.
inline PlayBundle trim_pre_snap(const PlayBundle& bundle) {
    if (!bundle.snap_frame) {
        throw std::runtime_error("trim_pre_snap: no snap event in play game="
                                 + std::to_string(bundle.key.game_key) + " play="
                                 + std::to_string(bundle.key.play_id) + " view="
                                 + std::string(to_string(bundle.key.view)));
    }
    const int snap = *bundle.snap_frame;
    PlayBundle out;
    out.key = bundle.key;
    out.snap_frame = bundle.snap_frame;
    out.tracking.reserve(bundle.tracking.size());
    for (const auto& t : bundle.tracking)
        if (t.frame >= snap) out.tracking.push_back(t);
    out.detections.reserve(bundle.detections.size());
    for (const auto& d : bundle.detections)
        if (d.frame >= snap) out.detections.push_back(d);
    return out;
}

// Rotates endzone tracking data 180 degrees about the field center:
// (x, y) -> (120 - x, 53.3 - y), angles shifted by 180. Inter-player
// geometry is preserved exactly; detections are image-space and untouched.
inline PlayBundle flip_endzone(const PlayBundle& bundle) {
    if (bundle.key.view != View::Endzone) {
        throw std::invalid_argument("flip_endzone: play game="
                                    + std::to_string(bundle.key.game_key)
                                    + " is a Sideline view; only Endzone data is flipped");
    }
    PlayBundle out = bundle;
    for (auto& t : out.tracking) {
        t.x = kFieldLength - t.x;
        t.y = kFieldWidth - t.y;
        t.o = normalize_angle_deg(t.o + 180.0);
        t.dir = normalize_angle_deg(t.dir + 180.0);
    }
    return out;
}

struct Diagnostic {
    enum class Kind {
        OverCapacityFrame,   // more than 22 detections in one frame
        OutOfBoundsTracking, // tracking coordinate outside the field
        FrameZeroSample,     // frame-0 tracking sample, droppable
        BadConfidence,       // detection confidence outside [0, 1]
    };
    Kind kind;
    int frame = 0;
    std::string message;
};

// Reports data oddities without mutating anything; the caller decides.
inline std::vector<Diagnostic> validate_play(const PlayBundle& bundle) {
    std::vector<Diagnostic> diags;

    std::vector<std::pair<int, int>> frame_counts;  // (frame, count), detections
    for (const auto& d : bundle.detections) {
        auto it = std::find_if(frame_counts.begin(), frame_counts.end(),
                               [&](const auto& fc) { return fc.first == d.frame; });
        if (it == frame_counts.end()) frame_counts.emplace_back(d.frame, 1);
        else ++it->second;
        if (d.confidence < 0.0 || d.confidence > 1.0) {
            diags.push_back({Diagnostic::Kind::BadConfidence, d.frame,
                             "detection confidence " + std::to_string(d.confidence)
                             + " outside [0,1] at frame " + std::to_string(d.frame)});
        }
    }
    std::sort(frame_counts.begin(), frame_counts.end());
    for (const auto& [frame, count] : frame_counts) {
        if (count > kMaxBoxesPerFrame) {
            diags.push_back({Diagnostic::Kind::OverCapacityFrame, frame,
                             "frame " + std::to_string(frame) + " holds "
                             + std::to_string(count) + " detections (max 22 players)"});
        }
    }
    for (const auto& t : bundle.tracking) {
        if (t.x < 0.0 || t.x > kFieldLength || t.y < 0.0 || t.y > kFieldWidth) {
            diags.push_back({Diagnostic::Kind::OutOfBoundsTracking, t.frame,
                             "player " + to_string(t.player) + " at ("
                             + std::to_string(t.x) + ", " + std::to_string(t.y)
                             + ") outside field bounds at frame " + std::to_string(t.frame)});
        }
        if (t.frame == 0) {
            diags.push_back({Diagnostic::Kind::FrameZeroSample, 0,
                             "player " + to_string(t.player)
                             + " has a frame-0 sample (likely mislabeled, droppable)"});
        }
    }
    return diags;
}

}  // namespace helmetid

#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace helmetid {

// Field dimensions in yards, endzones included.
inline constexpr double kFieldLength = 120.0;
inline constexpr double kFieldWidth = 53.3;

// Hard cap on emitted boxes per frame.
inline constexpr int kMaxBoxesPerFrame = 22;

enum class View { Sideline, Endzone };
enum class Side { Home, Visitor };

inline const char* to_string(View v) {
    return v == View::Sideline ? "Sideline" : "Endzone";
}

inline std::optional<View> parse_view(std::string_view s) {
    if (s == "Sideline") return View::Sideline;
    if (s == "Endzone") return View::Endzone;
    return std::nullopt;
}

struct PlayKey {
    int game_key = 0;
    int play_id = 0;
    View view = View::Sideline;

    friend auto operator<=>(const PlayKey&, const PlayKey&) = default;
};

// Jersey label like "H23" or "V7".
struct PlayerLabel {
    Side side = Side::Home;
    int jersey = 0;  // 0..99

    friend auto operator<=>(const PlayerLabel&, const PlayerLabel&) = default;
};

inline std::string to_string(const PlayerLabel& p) {
    return (p.side == Side::Home ? "H" : "V") + std::to_string(p.jersey);
}

inline std::optional<PlayerLabel> parse_player_label(std::string_view s) {
    if (s.size() < 2 || s.size() > 3) return std::nullopt;
    Side side;
    if (s[0] == 'H') side = Side::Home;
    else if (s[0] == 'V') side = Side::Visitor;
    else return std::nullopt;
    int jersey = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        jersey = jersey * 10 + (s[i] - '0');
    }
    return PlayerLabel{side, jersey};
}

// Maps any angle in degrees onto [0, 360).
inline double normalize_angle_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r >= 360.0 ? 0.0 : r;
}

// One player's field-coordinate state at one frame.
struct TrackingSample {
    PlayerLabel player;
    int frame = 0;
    double x = 0.0;    // yards along the field, 0..120
    double y = 0.0;    // yards across the field, 0..53.3
    double o = 0.0;    // body orientation, degrees [0, 360)
    double dir = 0.0;  // motion direction, degrees [0, 360)
    double s = 0.0;    // speed, yards/s
    double a = 0.0;    // acceleration, yards/s^2
    std::string event; // e.g. "ball_snap"; empty when none
};

struct BoundingBox {
    double left = 0.0;
    double top = 0.0;
    double width = 0.0;   // > 0
    double height = 0.0;  // > 0

    double center_x() const { return left + width / 2.0; }
    double center_y() const { return top + height / 2.0; }
    double area() const { return width * height; }
};

using Color = std::array<double, 3>;

// One helmet box proposed by the upstream detector.
struct Detection {
    int frame = 0;
    BoundingBox box;
    double confidence = 1.0;      // [0, 1]
    std::optional<Color> color;   // mean box color, channels in [0, 1]
};

// A helmet box carrying a final (or ground-truth) identity.
struct LabeledBox {
    int frame = 0;
    BoundingBox box;
    PlayerLabel label;
    bool impact = false;
};

// Everything known about one play from one camera view.
struct PlayBundle {
    PlayKey key;
    std::vector<TrackingSample> tracking;
    std::vector<Detection> detections;
    std::optional<int> snap_frame;  // frame of the "ball_snap" event
};

}  // namespace helmetid

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlp/error.hpp"
#include "vlp/frame.hpp"

namespace vlp::mesh {

// Wire protocol (all integers little-endian):
//   magic "VLCP" | version u8 = 1 | kind u8 | header_len u16 | header |
//   body_len u32 | body
// header = name UTF-8 | seq/request_id u32 | timestamp u64
enum class FrameKind : std::uint8_t { Topic = 1, Request = 2, Response = 3 };

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr char kWireMagic[4] = {'V', 'L', 'C', 'P'};

struct WireFrame {
    FrameKind kind = FrameKind::Topic;
    std::string name;            // topic or service name
    std::uint32_t seq = 0;       // seq for topics, request_id for services
    std::uint64_t timestamp_ns = 0;
    std::vector<std::uint8_t> body;
};

std::vector<std::uint8_t> encode_frame(const WireFrame& f);

// Throws FormatError on bad magic/version/truncation.
WireFrame decode_frame(const std::uint8_t* data, std::size_t len);
inline WireFrame decode_frame(const std::vector<std::uint8_t>& b) {
    return decode_frame(b.data(), b.size());
}

// ---- typed bodies ----

struct ImageBody {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::uint8_t encoding = 0;   // 0 = mono8
    std::vector<std::uint8_t> pixels;

    static ImageBody from_frame(const Frame& f);
    Frame to_frame(std::uint64_t timestamp_ns = 0) const;
};
std::vector<std::uint8_t> encode_image(const ImageBody& b);
ImageBody decode_image(const std::vector<std::uint8_t>& bytes);

struct PositionBody {
    double x_w = 0.0;
    double y_w = 0.0;
    double z_w = 0.0;
    double theta = 0.0;
    std::string id_a;
    std::string id_b;
    std::uint64_t solve_timestamp_ns = 0;
    std::uint32_t source_frame_seq = 0;
};
std::vector<std::uint8_t> encode_position(const PositionBody& b);
PositionBody decode_position(const std::vector<std::uint8_t>& bytes);

struct IdRecognitionRequest {
    ImageBody patch;
};
std::vector<std::uint8_t> encode_id_request(const IdRecognitionRequest& r);
IdRecognitionRequest decode_id_request(const std::vector<std::uint8_t>& bytes);

struct IdRecognitionResponse {
    std::string id;              // empty = no match
};
std::vector<std::uint8_t> encode_id_response(const IdRecognitionResponse& r);
IdRecognitionResponse decode_id_response(const std::vector<std::uint8_t>& bytes);

struct LedObservation {
    std::string id;
    double img_x = 0.0;          // working pixels
    double img_y = 0.0;
};

struct LedInfoRequest {
    std::vector<LedObservation> lamps;
    std::uint32_t source_frame_seq = 0;
    std::uint64_t capture_timestamp_ns = 0;
    std::uint16_t frame_width = 0;
    std::uint16_t frame_height = 0;
};
std::vector<std::uint8_t> encode_led_info(const LedInfoRequest& r);
LedInfoRequest decode_led_info(const std::vector<std::uint8_t>& bytes);

struct LedInfoResponse {
    std::uint8_t ack = 1;
};
std::vector<std::uint8_t> encode_led_ack(const LedInfoResponse& r);
LedInfoResponse decode_led_ack(const std::vector<std::uint8_t>& bytes);

// Topic and service names, mirroring the node graph.
inline constexpr const char* kTopicImage = "camera/image";
inline constexpr const char* kTopicLocation = "location";
inline constexpr const char* kServiceIdRecognition = "get_image";
inline constexpr const char* kServiceLedInfo = "LED_info_srv";
inline constexpr const char* kControlCredit = "mesh/credit";
inline constexpr const char* kControlEnd = "mesh/end";

} // namespace vlp::mesh

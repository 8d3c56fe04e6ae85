#include "vlp/mesh/wire.hpp"

#include <cstring>

namespace vlp::mesh {

namespace {

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v & 0xff));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void bytes(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
    void str8(const std::string& s) {
        if (s.size() > 255) throw FormatError("string field exceeds 255 bytes");
        u8(static_cast<std::uint8_t>(s.size()));
        bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    }

private:
    std::vector<std::uint8_t>& out_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t len) : p_(data), end_(data + len) {}

    std::uint8_t u8() {
        need(1);
        return *p_++;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p_[0] | (p_[1] << 8));
        p_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p_[k]) << (8 * k);
        p_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p_[k]) << (8 * k);
        p_ += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::vector<std::uint8_t> bytes(std::size_t n) {
        need(n);
        std::vector<std::uint8_t> out(p_, p_ + n);
        p_ += n;
        return out;
    }
    std::string str8() {
        std::size_t n = u8();
        need(n);
        std::string s(reinterpret_cast<const char*>(p_), n);
        p_ += n;
        return s;
    }
    std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw FormatError("wire frame truncated");
    }
    const std::uint8_t* p_;
    const std::uint8_t* end_;
};

} // namespace

std::vector<std::uint8_t> encode_frame(const WireFrame& f) {
    if (f.name.size() + 12 > 0xffff) throw FormatError("topic name too long");
    std::vector<std::uint8_t> out;
    out.reserve(4 + 1 + 1 + 2 + f.name.size() + 12 + 4 + f.body.size());
    ByteWriter w(out);
    w.bytes(reinterpret_cast<const std::uint8_t*>(kWireMagic), 4);
    w.u8(kWireVersion);
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.u16(static_cast<std::uint16_t>(f.name.size() + 12));
    w.bytes(reinterpret_cast<const std::uint8_t*>(f.name.data()), f.name.size());
    w.u32(f.seq);
    w.u64(f.timestamp_ns);
    w.u32(static_cast<std::uint32_t>(f.body.size()));
    w.bytes(f.body.data(), f.body.size());
    return out;
}

WireFrame decode_frame(const std::uint8_t* data, std::size_t len) {
    ByteReader r(data, len);
    auto magic = r.bytes(4);
    if (std::memcmp(magic.data(), kWireMagic, 4) != 0) throw FormatError("bad wire magic");
    std::uint8_t version = r.u8();
    if (version != kWireVersion) throw FormatError("unsupported wire version");
    std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 3) throw FormatError("unknown frame kind");
    std::uint16_t header_len = r.u16();
    if (header_len < 12) throw FormatError("header too short");
    std::size_t name_len = header_len - 12;
    auto name_bytes = r.bytes(name_len);
    WireFrame f;
    f.kind = static_cast<FrameKind>(kind);
    f.name.assign(name_bytes.begin(), name_bytes.end());
    f.seq = r.u32();
    f.timestamp_ns = r.u64();
    std::uint32_t body_len = r.u32();
    f.body = r.bytes(body_len);
    if (r.remaining() != 0) throw FormatError("trailing bytes after wire frame");
    return f;
}

// ---- typed bodies ----

ImageBody ImageBody::from_frame(const Frame& f) {
    ImageBody b;
    b.width = static_cast<std::uint16_t>(f.width);
    b.height = static_cast<std::uint16_t>(f.height);
    b.encoding = 0;
    b.pixels = f.pixels;
    return b;
}

Frame ImageBody::to_frame(std::uint64_t timestamp_ns) const {
    Frame f(width, height, timestamp_ns);
    f.pixels = pixels;
    return f;
}

std::vector<std::uint8_t> encode_image(const ImageBody& b) {
    if (b.pixels.size() != static_cast<std::size_t>(b.width) * b.height)
        throw FormatError("image body pixel count does not match dimensions");
    std::vector<std::uint8_t> out;
    out.reserve(5 + b.pixels.size());
    ByteWriter w(out);
    w.u16(b.width);
    w.u16(b.height);
    w.u8(b.encoding);
    w.bytes(b.pixels.data(), b.pixels.size());
    return out;
}

ImageBody decode_image(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    ImageBody b;
    b.width = r.u16();
    b.height = r.u16();
    b.encoding = r.u8();
    if (b.encoding != 0) throw FormatError("unsupported image encoding");
    std::size_t n = static_cast<std::size_t>(b.width) * b.height;
    if (r.remaining() != n) throw FormatError("image body size mismatch");
    b.pixels = r.bytes(n);
    return b;
}

std::vector<std::uint8_t> encode_position(const PositionBody& b) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.f64(b.x_w);
    w.f64(b.y_w);
    w.f64(b.z_w);
    w.f64(b.theta);
    w.str8(b.id_a);
    w.str8(b.id_b);
    w.u64(b.solve_timestamp_ns);
    w.u32(b.source_frame_seq);
    return out;
}

PositionBody decode_position(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    PositionBody b;
    b.x_w = r.f64();
    b.y_w = r.f64();
    b.z_w = r.f64();
    b.theta = r.f64();
    b.id_a = r.str8();
    b.id_b = r.str8();
    b.solve_timestamp_ns = r.u64();
    b.source_frame_seq = r.u32();
    if (r.remaining() != 0) throw FormatError("trailing bytes in position body");
    return b;
}

std::vector<std::uint8_t> encode_id_request(const IdRecognitionRequest& r) {
    return encode_image(r.patch);
}

IdRecognitionRequest decode_id_request(const std::vector<std::uint8_t>& bytes) {
    return {decode_image(bytes)};
}

std::vector<std::uint8_t> encode_id_response(const IdRecognitionResponse& r) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.str8(r.id);
    return out;
}

IdRecognitionResponse decode_id_response(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    IdRecognitionResponse resp;
    resp.id = r.str8();
    if (r.remaining() != 0) throw FormatError("trailing bytes in id response");
    return resp;
}

std::vector<std::uint8_t> encode_led_info(const LedInfoRequest& req) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.u32(req.source_frame_seq);
    w.u64(req.capture_timestamp_ns);
    w.u16(req.frame_width);
    w.u16(req.frame_height);
    w.u16(static_cast<std::uint16_t>(req.lamps.size()));
    for (const auto& lamp : req.lamps) {
        w.str8(lamp.id);
        w.f64(lamp.img_x);
        w.f64(lamp.img_y);
    }
    return out;
}

LedInfoRequest decode_led_info(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes.data(), bytes.size());
    LedInfoRequest req;
    req.source_frame_seq = r.u32();
    req.capture_timestamp_ns = r.u64();
    req.frame_width = r.u16();
    req.frame_height = r.u16();
    std::uint16_t n = r.u16();
    for (std::uint16_t k = 0; k < n; ++k) {
        LedObservation obs;
        obs.id = r.str8();
        obs.img_x = r.f64();
        obs.img_y = r.f64();
        req.lamps.push_back(std::move(obs));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes in LED info request");
    return req;
}

std::vector<std::uint8_t> encode_led_ack(const LedInfoResponse& r) {
    return {r.ack};
}

LedInfoResponse decode_led_ack(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() != 1) throw FormatError("LED info ack must be one byte");
    return {bytes[0]};
}

} // namespace vlp::mesh

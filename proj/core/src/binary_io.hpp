#pragma once

// Little-endian encoding helpers shared by the file formats. Values are
// assembled byte-by-byte so the output does not depend on host endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "visword/error.hpp"
#include "visword/formats.hpp"

namespace visword::detail {

class ByteWriter {
  public:
    void magic(std::string_view m) { buf_.append(m.data(), m.size()); }

    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s.data(), s.size());
    }

    const std::string& bytes() const noexcept { return buf_; }
    std::size_t size() const noexcept { return buf_.size(); }

  private:
    std::string buf_;
};

class ByteReader {
  public:
    ByteReader(std::string data, std::string what) : data_(std::move(data)), what_(std::move(what)) {}

    /// Checks the 4-byte magic and u32 version. An empty or short file, or a
    /// wrong magic, is a corrupt header; a wrong version is reported apart.
    void header(std::string_view magic, std::uint32_t version) {
        if (data_.size() < magic.size() + 4 ||
            std::string_view(data_).substr(0, magic.size()) != magic) {
            raise(ErrorCode::corrupt_header, what_ + ": expected magic " + std::string(magic));
        }
        pos_ = magic.size();
        const std::uint32_t v = u32();
        if (v != version) {
            raise(ErrorCode::unsupported_version,
                  what_ + ": version " + std::to_string(v) + " (expected " +
                      std::to_string(version) + ")");
        }
    }

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

    std::uint16_t u16() {
        const char* p = take(2);
        return static_cast<std::uint16_t>(byte(p, 0) | (byte(p, 1) << 8));
    }

    std::uint32_t u32() {
        const char* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(p, i)) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        const char* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte(p, i)) << (8 * i);
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::string str() {
        const std::uint32_t n = u32();
        const char* p = take(n);
        return std::string(p, n);
    }

    /// Guards a count read from the file before allocating for it.
    void require(std::uint64_t bytes) const {
        if (bytes > data_.size() - pos_) truncated();
    }

    bool at_end() const noexcept { return pos_ == data_.size(); }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

  private:
    static std::uint32_t byte(const char* p, int i) {
        return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i]));
    }

    const char* take(std::size_t n) {
        if (n > data_.size() - pos_) truncated();
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }

    [[noreturn]] void truncated() const {
        raise(ErrorCode::truncated, what_ + ": unexpected end of data at byte " + std::to_string(pos_));
    }

    std::string data_;
    std::string what_;
    std::size_t pos_ = 0;
};

}  // namespace visword::detail

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hytegrid {

/// Typed byte buffer used for all inter-primitive messages and for primitive
/// serialization. Wire format is little-endian regardless of host order;
/// sequences are preceded by a 64-bit element count.
class MessageBuffer {
  public:
    MessageBuffer() = default;
    explicit MessageBuffer(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    void put_u8(std::uint8_t v) { bytes_.push_back(v); }
    void put_u32(std::uint32_t v) { put_uint(v, 4); }
    void put_u64(std::uint64_t v) { put_uint(v, 8); }
    void put_i64(std::int64_t v) { put_uint(static_cast<std::uint64_t>(v), 8); }
    void put_f64(double v) { put_uint(std::bit_cast<std::uint64_t>(v), 8); }

    void put_f64_span(std::span<const double> vals) {
        put_u64(vals.size());
        for (double v : vals)
            put_f64(v);
    }
    void put_u8_span(std::span<const std::uint8_t> vals) {
        put_u64(vals.size());
        bytes_.insert(bytes_.end(), vals.begin(), vals.end());
    }
    void put_string(const std::string& s) {
        put_u64(s.size());
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }

    std::uint8_t get_u8() { return static_cast<std::uint8_t>(get_uint(1)); }
    std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_uint(4)); }
    std::uint64_t get_u64() { return get_uint(8); }
    std::int64_t get_i64() { return static_cast<std::int64_t>(get_uint(8)); }
    double get_f64() { return std::bit_cast<double>(get_uint(8)); }

    std::vector<double> get_f64_vector() {
        const std::uint64_t n = get_u64();
        check_remaining(n * 8);
        std::vector<double> out(n);
        for (auto& v : out)
            v = get_f64();
        return out;
    }
    std::vector<std::uint8_t> get_u8_vector() {
        const std::uint64_t n = get_u64();
        check_remaining(n);
        std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                      bytes_.begin() + static_cast<std::ptrdiff_t>(cursor_ + n));
        cursor_ += n;
        return out;
    }
    std::string get_string() {
        const std::uint64_t n = get_u64();
        check_remaining(n);
        std::string out(bytes_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                        bytes_.begin() + static_cast<std::ptrdiff_t>(cursor_ + n));
        cursor_ += n;
        return out;
    }

    std::size_t size() const { return bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - cursor_; }
    bool fully_consumed() const { return cursor_ == bytes_.size(); }
    void rewind() { cursor_ = 0; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  private:
    void put_uint(std::uint64_t v, int nbytes) {
        for (int i = 0; i < nbytes; ++i)
            bytes_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
    }
    std::uint64_t get_uint(int nbytes) {
        check_remaining(static_cast<std::uint64_t>(nbytes));
        std::uint64_t v = 0;
        for (int i = 0; i < nbytes; ++i)
            v |= static_cast<std::uint64_t>(bytes_[cursor_ + static_cast<std::size_t>(i)]) << (8 * i);
        cursor_ += static_cast<std::size_t>(nbytes);
        return v;
    }
    void check_remaining(std::uint64_t need) const {
        if (cursor_ + need > bytes_.size())
            throw std::out_of_range("MessageBuffer: read past end (truncated message)");
    }

    std::vector<std::uint8_t> bytes_;
    std::size_t cursor_ = 0;
};

} // namespace hytegrid

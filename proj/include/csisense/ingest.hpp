#pragma once

// Readers and writers for CSI traces:
//  * the framed binary beamforming-feedback ("bfee") log written by the
//    Intel 5300 CSI tool, decoded bit-exactly;
//  * a portable line-oriented text format used for fixtures and synthetic data.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csisense/csi.hpp"
#include "csisense/detail/text.hpp"

namespace csisense {

/// Thrown for unreadable input. `location()` is a byte offset for binary
/// logs and a 1-based line number for text traces.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  std::size_t location() const { return location_; }

 private:
  std::size_t location_;
};

/// A record whose framing is intact but whose contents are inconsistent.
class MalformedRecordError : public ParseError {
 public:
  using ParseError::ParseError;
};

namespace bfee {

inline constexpr std::uint8_t kCode = 0xBB;
inline constexpr std::size_t kSubcarriers = 30;
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::size_t kMaxAntennas = 3;

/// floor((30 * (n_rx * n_tx * 16 + 3) + 7) / 8): 3 skipped bits per
/// subcarrier followed by one 8-bit real and imaginary part per antenna pair.
constexpr std::size_t payload_length(std::size_t n_rx, std::size_t n_tx) {
  return (kSubcarriers * (n_rx * n_tx * 8 * 2 + 3) + 7) / 8;
}

/// rx permutation stored two bits per receive chain.
inline std::array<std::size_t, kMaxAntennas> permutation(std::uint8_t antenna_sel) {
  return {static_cast<std::size_t>(antenna_sel & 0x3),
          static_cast<std::size_t>((antenna_sel >> 2) & 0x3),
          static_cast<std::size_t>((antenna_sel >> 4) & 0x3)};
}

inline bool valid_permutation(std::uint8_t antenna_sel, std::size_t n_rx) {
  const auto perm = permutation(antenna_sel);
  std::array<bool, 4> seen{};
  for (std::size_t i = 0; i < n_rx; ++i) {
    if (perm[i] >= n_rx || seen[perm[i]]) return false;
    seen[perm[i]] = true;
  }
  return true;
}

}  // namespace bfee

struct BfeeRecord {
  std::uint32_t timestamp_low = 0;  // microseconds, wraps at 2^32
  std::uint16_t bfee_count = 0;
  std::uint8_t n_rx = 1;
  std::uint8_t n_tx = 1;
  std::uint8_t rssi_a = 0;
  std::uint8_t rssi_b = 0;
  std::uint8_t rssi_c = 0;
  std::int8_t noise = 0;
  std::uint8_t agc = 0;
  std::uint8_t antenna_sel = 0;
  std::uint16_t len = 0;
  std::uint16_t rate_flags = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const BfeeRecord&, const BfeeRecord&) = default;
};

/// Decodes the record body that follows the 0xBB code byte.
inline BfeeRecord read_bfee_body(std::span<const std::uint8_t> body, std::size_t offset = 0) {
  if (body.size() < bfee::kHeaderSize) {
    throw MalformedRecordError("bfee record shorter than its fixed header", offset);
  }
  auto u16 = [&](std::size_t i) {
    return static_cast<std::uint16_t>(body[i] | (body[i + 1] << 8));
  };
  BfeeRecord r;
  r.timestamp_low = static_cast<std::uint32_t>(body[0]) | (static_cast<std::uint32_t>(body[1]) << 8) |
                    (static_cast<std::uint32_t>(body[2]) << 16) |
                    (static_cast<std::uint32_t>(body[3]) << 24);
  r.bfee_count = u16(4);
  // bytes 6..7 are reserved
  r.n_rx = body[8];
  r.n_tx = body[9];
  r.rssi_a = body[10];
  r.rssi_b = body[11];
  r.rssi_c = body[12];
  r.noise = static_cast<std::int8_t>(body[13]);
  r.agc = body[14];
  r.antenna_sel = body[15];
  r.len = u16(16);
  r.rate_flags = u16(18);
  if (r.n_rx < 1 || r.n_rx > bfee::kMaxAntennas || r.n_tx < 1 || r.n_tx > bfee::kMaxAntennas) {
    throw MalformedRecordError("bfee record antenna counts out of range", offset);
  }
  if (r.len != bfee::payload_length(r.n_rx, r.n_tx)) {
    throw MalformedRecordError("bfee payload length inconsistent with antenna counts", offset);
  }
  if (body.size() != bfee::kHeaderSize + r.len) {
    throw MalformedRecordError("bfee record size disagrees with its payload length", offset);
  }
  r.payload.assign(body.begin() + bfee::kHeaderSize, body.end());
  return r;
}

inline std::vector<std::uint8_t> write_bfee_body(const BfeeRecord& r) {
  std::vector<std::uint8_t> out(bfee::kHeaderSize + r.payload.size(), 0);
  out[0] = r.timestamp_low & 0xFF;
  out[1] = (r.timestamp_low >> 8) & 0xFF;
  out[2] = (r.timestamp_low >> 16) & 0xFF;
  out[3] = (r.timestamp_low >> 24) & 0xFF;
  out[4] = r.bfee_count & 0xFF;
  out[5] = r.bfee_count >> 8;
  out[8] = r.n_rx;
  out[9] = r.n_tx;
  out[10] = r.rssi_a;
  out[11] = r.rssi_b;
  out[12] = r.rssi_c;
  out[13] = static_cast<std::uint8_t>(r.noise);
  out[14] = r.agc;
  out[15] = r.antenna_sel;
  out[16] = r.len & 0xFF;
  out[17] = r.len >> 8;
  out[18] = r.rate_flags & 0xFF;
  out[19] = r.rate_flags >> 8;
  std::copy(r.payload.begin(), r.payload.end(), out.begin() + bfee::kHeaderSize);
  return out;
}

/// Wraps a record body in the log framing: u16 big-endian size (code byte
/// plus body), then the code byte.
inline std::vector<std::uint8_t> frame_log_record(std::uint8_t code,
                                                  std::span<const std::uint8_t> body) {
  const std::size_t size = body.size() + 1;
  if (size > 0xFFFF) throw std::length_error("log record exceeds 65535 bytes");
  std::vector<std::uint8_t> out;
  out.reserve(size + 2);
  out.push_back(static_cast<std::uint8_t>(size >> 8));
  out.push_back(static_cast<std::uint8_t>(size & 0xFF));
  out.push_back(code);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

/// Decodes the packed CSI matrix. The returned frame's timestamp is the raw
/// timestamp_low in seconds. Entry j of a subcarrier block maps to
/// rx = j / n_tx, tx = j % n_tx before the rx permutation is applied.
inline CsiFrame decode_bfee(const BfeeRecord& r, std::size_t offset = 0) {
  const std::size_t n_rx = r.n_rx;
  const std::size_t n_tx = r.n_tx;
  if (n_rx < 1 || n_rx > bfee::kMaxAntennas || n_tx < 1 || n_tx > bfee::kMaxAntennas) {
    throw MalformedRecordError("bfee antenna counts out of range", offset);
  }
  if (r.payload.size() != r.len || r.len != bfee::payload_length(n_rx, n_tx)) {
    throw MalformedRecordError("bfee payload length inconsistent", offset);
  }
  if (!bfee::valid_permutation(r.antenna_sel, n_rx)) {
    throw MalformedRecordError("bfee antenna_sel is not a permutation of the rx chains", offset);
  }
  const auto perm = bfee::permutation(r.antenna_sel);
  const auto& p = r.payload;

  // Reads 8 bits starting at the bit cursor, least significant bit first.
  auto read8 = [&](std::size_t cursor) -> std::int8_t {
    const std::size_t byte = cursor / 8;
    const unsigned shift = cursor % 8;
    if (byte >= p.size() || (shift != 0 && byte + 1 >= p.size())) {
      throw MalformedRecordError("bfee bit cursor overran the payload", offset);
    }
    unsigned v = p[byte] >> shift;
    if (shift != 0) v |= static_cast<unsigned>(p[byte + 1]) << (8 - shift);
    return static_cast<std::int8_t>(static_cast<std::uint8_t>(v & 0xFF));
  };

  CsiFrame frame(r.timestamp_low * 1e-6, bfee::kSubcarriers, n_rx, n_tx);
  std::size_t cursor = 0;
  for (std::size_t sc = 0; sc < bfee::kSubcarriers; ++sc) {
    cursor += 3;
    for (std::size_t j = 0; j < n_rx * n_tx; ++j) {
      const double re = read8(cursor);
      const double im = read8(cursor + 8);
      cursor += 16;
      frame.set(sc, perm[j / n_tx], j % n_tx, Complex(re, im));
    }
  }
  frame.rssi_a = r.rssi_a;
  frame.rssi_b = r.rssi_b;
  frame.rssi_c = r.rssi_c;
  frame.noise = r.noise;
  frame.agc = r.agc;
  return frame;
}

/// Packs a frame into a bfee record; inverse of decode_bfee. Entries must be
/// integers in [-128, 127] and the frame must carry 30 subcarriers.
inline BfeeRecord encode_bfee(const CsiFrame& frame, std::uint8_t antenna_sel,
                              std::uint32_t timestamp_low) {
  const std::size_t n_rx = frame.n_rx();
  const std::size_t n_tx = frame.n_tx();
  if (frame.n_subcarriers() != bfee::kSubcarriers) {
    throw std::range_error("encode_bfee: the log format carries exactly 30 subcarriers");
  }
  if (n_rx > bfee::kMaxAntennas || n_tx > bfee::kMaxAntennas) {
    throw std::range_error("encode_bfee: at most 3 rx and 3 tx antennas");
  }
  if (!bfee::valid_permutation(antenna_sel, n_rx)) {
    throw std::range_error("encode_bfee: antenna_sel is not a permutation of the rx chains");
  }
  auto to_i8 = [](double v) -> std::uint8_t {
    if (v != std::nearbyint(v) || v < -128.0 || v > 127.0) {
      throw std::range_error("encode_bfee: entry not representable as signed 8-bit");
    }
    return static_cast<std::uint8_t>(static_cast<std::int8_t>(v));
  };

  BfeeRecord r;
  r.timestamp_low = timestamp_low;
  r.n_rx = static_cast<std::uint8_t>(n_rx);
  r.n_tx = static_cast<std::uint8_t>(n_tx);
  r.rssi_a = static_cast<std::uint8_t>(frame.rssi_a.value_or(0));
  r.rssi_b = static_cast<std::uint8_t>(frame.rssi_b.value_or(0));
  r.rssi_c = static_cast<std::uint8_t>(frame.rssi_c.value_or(0));
  r.noise = static_cast<std::int8_t>(frame.noise.value_or(0));
  r.agc = static_cast<std::uint8_t>(frame.agc.value_or(0));
  r.antenna_sel = antenna_sel;
  r.len = static_cast<std::uint16_t>(bfee::payload_length(n_rx, n_tx));
  r.payload.assign(r.len, 0);

  auto write8 = [&](std::size_t cursor, std::uint8_t v) {
    const std::size_t byte = cursor / 8;
    const unsigned shift = cursor % 8;
    r.payload[byte] |= static_cast<std::uint8_t>(v << shift);
    if (shift != 0) r.payload[byte + 1] |= static_cast<std::uint8_t>(v >> (8 - shift));
  };

  const auto perm = bfee::permutation(antenna_sel);
  std::size_t cursor = 0;
  for (std::size_t sc = 0; sc < bfee::kSubcarriers; ++sc) {
    cursor += 3;
    for (std::size_t j = 0; j < n_rx * n_tx; ++j) {
      const Complex c = frame.at(sc, perm[j / n_tx], j % n_tx);
      write8(cursor, to_i8(c.real()));
      write8(cursor + 8, to_i8(c.imag()));
      cursor += 16;
    }
  }
  return r;
}

inline BfeeRecord encode_bfee(const CsiFrame& frame, std::uint8_t antenna_sel) {
  const auto micros = static_cast<std::uint64_t>(std::llround(frame.timestamp() * 1e6));
  return encode_bfee(frame, antenna_sel, static_cast<std::uint32_t>(micros & 0xFFFFFFFFULL));
}

/// Convenience: a complete framed 0xBB log record for `frame`.
inline std::vector<std::uint8_t> encode_log_record(const BfeeRecord& r) {
  const auto body = write_bfee_body(r);
  return frame_log_record(bfee::kCode, body);
}

struct LogParseOptions {
  /// Strict mode turns malformed records and truncated tails into errors;
  /// lenient mode skips them and records a warning.
  bool strict = false;
  double nominal_rate = 100.0;
};

struct LogParseResult {
  Trace trace;
  std::size_t skipped_records = 0;
  std::vector<std::string> warnings;
};

/// Decodes every 0xBB record of a framed log into one trace. Timestamps are
/// unwrapped across u32 microsecond rollovers and shifted so the first frame
/// is at t = 0.
inline LogParseResult parse_log(std::span<const std::uint8_t> bytes,
                                const LogParseOptions& options = {}) {
  LogParseResult result{Trace(options.nominal_rate), 0, {}};
  std::size_t pos = 0;
  bool have_first = false;
  std::uint32_t last_raw = 0;
  std::uint64_t epoch = 0;  // accumulated rollovers * 2^32
  std::uint64_t first_us = 0;

  auto fail = [&](const auto& err) {
    if (options.strict) throw err;
    ++result.skipped_records;
    result.warnings.push_back(std::string(err.what()) + " at byte " + std::to_string(err.location()));
  };

  while (pos < bytes.size()) {
    if (bytes.size() - pos < 2) {
      ParseError err("truncated record header", pos);
      if (options.strict) throw err;
      result.warnings.push_back(std::string(err.what()) + " at byte " + std::to_string(pos));
      break;
    }
    const std::size_t size = (static_cast<std::size_t>(bytes[pos]) << 8) | bytes[pos + 1];
    if (size == 0) {
      fail(MalformedRecordError("zero-length record", pos));
      pos += 2;
      continue;
    }
    if (bytes.size() - pos - 2 < size) {
      ParseError err("truncated record", pos);
      if (options.strict) throw err;
      result.warnings.push_back(std::string(err.what()) + " at byte " + std::to_string(pos));
      break;
    }
    const std::size_t record_offset = pos;
    const std::uint8_t code = bytes[pos + 2];
    const auto body = bytes.subspan(pos + 3, size - 1);
    pos += 2 + size;
    if (code != bfee::kCode) continue;

    try {
      const BfeeRecord record = read_bfee_body(body, record_offset);
      CsiFrame frame = decode_bfee(record, record_offset);
      std::uint64_t next_epoch = epoch;
      if (have_first && record.timestamp_low < last_raw) next_epoch += (1ULL << 32);
      const std::uint64_t unwrapped = next_epoch + record.timestamp_low;
      if (!have_first) first_us = unwrapped;
      const double t = static_cast<double>(unwrapped - first_us) * 1e-6;
      if (!result.trace.empty()) {
        if (!frame.same_shape(result.trace[0])) {
          throw MalformedRecordError("record antenna configuration differs from the trace", record_offset);
        }
        if (!(t > result.trace.frames().back().timestamp())) {
          throw MalformedRecordError("record timestamp does not advance", record_offset);
        }
      }
      frame.set_timestamp(t);
      result.trace.push_back(std::move(frame));
      have_first = true;
      epoch = next_epoch;
      last_raw = record.timestamp_low;
    } catch (const ParseError& err) {
      if (options.strict) throw;
      fail(err);
    }
  }
  return result;
}

inline std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline LogParseResult read_log_file(const std::string& path, const LogParseOptions& options = {}) {
  const auto bytes = read_binary_file(path);
  return parse_log(bytes, options);
}

// ---------------------------------------------------------------------------
// Portable text traces
//
//   csisense-trace/1 rate=100 subcarriers=30 rx=1 tx=1 subject=s01 label=happy
//       session=seq1 attr.gender=female
//   <t> <re> <im> <re> <im> ...        one line per frame, [sc][rx][tx] order
//
// Header values are percent-escaped. Numbers use the shortest representation
// that round-trips exactly.

inline constexpr std::string_view kTraceMagic = "csisense-trace/1";

inline void write_trace(const Trace& trace, std::ostream& out) {
  using detail::escape_token;
  using detail::format_double;
  std::size_t n_sc = 0, n_rx = 0, n_tx = 0;
  if (!trace.empty()) {
    n_sc = trace[0].n_subcarriers();
    n_rx = trace[0].n_rx();
    n_tx = trace[0].n_tx();
  }
  const auto& md = trace.metadata();
  out << kTraceMagic << " rate=" << format_double(trace.nominal_rate()) << " subcarriers=" << n_sc
      << " rx=" << n_rx << " tx=" << n_tx;
  if (!md.subject_id.empty()) out << " subject=" << escape_token(md.subject_id);
  if (!md.label.empty()) out << " label=" << escape_token(md.label);
  if (!md.session.empty()) out << " session=" << escape_token(md.session);
  for (const auto& [k, v] : md.attributes) {
    out << " attr." << escape_token(k) << '=' << escape_token(v);
  }
  out << '\n';
  std::string line;
  for (const auto& f : trace.frames()) {
    line = format_double(f.timestamp());
    for (const auto& c : f.matrix()) {
      line += ' ';
      line += format_double(c.real());
      line += ' ';
      line += format_double(c.imag());
    }
    line += '\n';
    out << line;
  }
}

inline void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace(trace, out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing trace header", 1);
  const auto tokens = detail::split_ws(line);
  if (tokens.empty() || tokens[0] != kTraceMagic) {
    throw ParseError("missing or unsupported trace magic token", 1);
  }
  double rate = 0.0;
  std::size_t n_sc = 0, n_rx = 0, n_tx = 0;
  bool has_rate = false, has_sc = false, has_rx = false, has_tx = false;
  TraceMetadata md;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto tok = tokens[i];
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw ParseError("header token without '='", 1);
    const auto key = tok.substr(0, eq);
    auto value = detail::unescape_token(tok.substr(eq + 1));
    if (!value) throw ParseError("bad escape in header value", 1);
    auto count = [&](bool& flag) {
      auto v = detail::parse_int<std::size_t>(*value);
      if (!v) throw ParseError("header count is not an integer: " + std::string(key), 1);
      flag = true;
      return *v;
    };
    if (key == "rate") {
      auto v = detail::parse_double(*value);
      if (!v || !(*v > 0.0)) throw ParseError("header rate must be a positive number", 1);
      rate = *v;
      has_rate = true;
    } else if (key == "subcarriers") {
      n_sc = count(has_sc);
    } else if (key == "rx") {
      n_rx = count(has_rx);
    } else if (key == "tx") {
      n_tx = count(has_tx);
    } else if (key == "subject") {
      md.subject_id = *value;
    } else if (key == "label") {
      md.label = *value;
    } else if (key == "session") {
      md.session = *value;
    } else if (key.starts_with("attr.")) {
      auto name = detail::unescape_token(key.substr(5));
      if (!name || name->empty()) throw ParseError("bad attribute name in header", 1);
      md.attributes[*name] = *value;
    } else {
      throw ParseError("unknown header key: " + std::string(key), 1);
    }
  }
  if (!has_rate || !has_sc || !has_rx || !has_tx) {
    throw ParseError("header must declare rate, subcarriers, rx and tx", 1);
  }

  Trace trace(rate, std::move(md));
  const std::size_t entries = n_sc * n_rx * n_tx;
  std::size_t line_no = 1;
  std::vector<Complex> matrix;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (entries == 0) throw ParseError("frame line in a trace with zero dimensions", line_no);
    if (fields.size() != 1 + 2 * entries) {
      throw ParseError("frame line has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(1 + 2 * entries),
                       line_no);
    }
    auto num = [&](std::string_view s) {
      auto v = detail::parse_double(s);
      if (!v || !std::isfinite(*v)) throw ParseError("bad number '" + std::string(s) + "'", line_no);
      return *v;
    };
    const double t = num(fields[0]);
    matrix.clear();
    matrix.reserve(entries);
    for (std::size_t k = 0; k < entries; ++k) {
      matrix.emplace_back(num(fields[1 + 2 * k]), num(fields[2 + 2 * k]));
    }
    try {
      trace.push_back(CsiFrame(t, n_sc, n_rx, n_tx, matrix));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return trace;
}

inline Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace(in);
}

}  // namespace csisense

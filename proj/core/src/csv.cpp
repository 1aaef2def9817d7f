#include "lqrpg/csv.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace lqrpg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header.empty() && row.size() != header.size())
    throw DimensionError("CsvTable: row width does not match header");
  rows.push_back(std::move(row));
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

std::string cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string quoted = "\"";
  for (char c : v) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void write_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_csv: cannot open " + path);
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  if (!out) throw Error("write_csv: write failed for " + path);
}

namespace {

// Compact SHA-1; fine for content fingerprints.
struct Sha1 {
  std::array<std::uint32_t, 5> h{0x67452301u, 0xEFCDAB89u, 0x98BADCFEu,
                                 0x10325476u, 0xC3D2E1F0u};
  std::uint64_t total = 0;
  std::array<unsigned char, 64> block{};
  std::size_t fill = 0;

  static std::uint32_t rol(std::uint32_t x, int s) {
    return (x << s) | (x >> (32 - s));
  }

  void process() {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(block[4 * i]) << 24) |
             (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) |
             std::uint32_t(block[4 * i + 3]);
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rol(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
  }

  void update(const unsigned char* data, std::size_t len) {
    total += len;
    while (len) {
      const std::size_t take = std::min(len, block.size() - fill);
      std::memcpy(block.data() + fill, data, take);
      fill += take;
      data += take;
      len -= take;
      if (fill == block.size()) {
        process();
        fill = 0;
      }
    }
  }

  std::string finish() {
    const std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = (bits >> (56 - 8 * i)) & 0xFF;
    update(len, 8);
    char out[41];
    for (int i = 0; i < 5; ++i)
      std::snprintf(out + 8 * i, 9, "%08x", h[i]);
    return std::string(out, 40);
  }
};

}  // namespace

std::string git_blob_sha1(const std::string& content) {
  Sha1 s;
  const std::string prefix = "blob " + std::to_string(content.size());
  s.update(reinterpret_cast<const unsigned char*>(prefix.data()),
           prefix.size());
  const unsigned char nul = 0;
  s.update(&nul, 1);
  s.update(reinterpret_cast<const unsigned char*>(content.data()),
           content.size());
  return s.finish();
}

}  // namespace lqrpg

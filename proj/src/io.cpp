#include "txa/io.hpp"

#include "txa/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace txa {

namespace {

std::vector<std::string_view> split_line(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

IngestResult ingest_transactions(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file: " + path.string());
  return ingest_transactions(in, columns);
}

IngestResult ingest_transactions(std::istream& in, const ColumnMap& columns) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("input has no header line");

  const auto header = split_line(line);
  auto col = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int c_client = col(columns.client);
  const int c_merchant = col(columns.merchant);
  const int c_date = col(columns.date);
  const int c_amount = col(columns.amount);
  const int c_mcc = col(columns.mcc);
  const int c_district = col(columns.district);
  const int c_region = col(columns.region);  // optional
  for (const auto& [idx, name] :
       {std::pair{c_client, columns.client}, {c_merchant, columns.merchant},
        {c_date, columns.date}, {c_amount, columns.amount}, {c_mcc, columns.mcc},
        {c_district, columns.district}}) {
    if (idx < 0) throw SchemaError("missing mandatory column: " + name);
  }
  const std::size_t min_fields = static_cast<std::size_t>(
      std::max({c_client, c_merchant, c_date, c_amount, c_mcc, c_district, c_region}) + 1);

  IngestResult result;
  std::uint64_t line_no = 1;
  auto reject = [&](std::uint64_t ln, std::string reason) {
    ++result.rejected;
    if (result.reject_sample.size() < IngestResult::kRejectSampleCap)
      result.reject_sample.push_back({ln, std::move(reason)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view raw = trim(line);
    if (raw.empty()) continue;
    const auto fields = split_line(raw);
    if (fields.size() < min_fields) {
      reject(line_no, "too few fields");
      continue;
    }
    const auto stamp = try_parse_timestamp(trim(fields[c_date]));
    if (!stamp) {
      reject(line_no, "unparseable timestamp");
      continue;
    }
    double amount = 0.0;
    if (!parse_double(trim(fields[c_amount]), amount)) {
      reject(line_no, "unparseable amount");
      continue;
    }
    if (amount < 0.0) {
      reject(line_no, "negative amount");
      continue;
    }
    int mcc = 0;
    if (!parse_int(trim(fields[c_mcc]), mcc) || mcc < 0 || mcc > 9999) {
      reject(line_no, "mcc outside 0000-9999");
      continue;
    }
    TransactionRow row;
    row.client = std::string(trim(fields[c_client]));
    row.merchant = std::string(trim(fields[c_merchant]));
    row.date = stamp->day;
    row.time_sec = stamp->seconds;
    row.amount = amount;
    row.mcc = mcc;
    row.district = std::string(trim(fields[c_district]));
    row.region = c_region >= 0 ? std::string(trim(fields[c_region])) : std::string();
    if (row.client.empty() || row.merchant.empty() || row.district.empty()) {
      reject(line_no, "empty identifier");
      continue;
    }
    result.table.push(row);
    ++result.accepted;
  }
  return result;
}

void write_transactions(std::ostream& out, const TransactionTable& t) {
  out << "client_id,merchant_id,date,amount,mcc,district_id,region_id\n";
  char buf[64];
  for (std::size_t i = 0; i < t.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.2f,%04d", t.amount[i], int(t.mcc[i]));
    out << t.clients.name(t.client[i]) << ',' << t.merchants.name(t.merchant[i]) << ','
        << format_date(t.date[i]) << ',' << buf << ',' << t.districts.name(t.district[i]) << ','
        << t.regions.name(t.region[i]) << '\n';
  }
}

void write_transactions(const std::filesystem::path& path, const TransactionTable& table) {
  AtomicWriter w(path);
  std::ostringstream os;
  write_transactions(os, table);
  w.buffer() = os.str();
  w.commit();
}

AtomicWriter::AtomicWriter(std::filesystem::path target) : target_(std::move(target)) {}

AtomicWriter::~AtomicWriter() = default;

void AtomicWriter::commit() {
  if (committed_) return;
  const auto tmp = target_.parent_path() /
                   (target_.filename().string() + ".tmp." +
                    std::to_string(splitmix64(fnv1a64(target_.string())) & 0xffffffu));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw Error("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, target_);
  committed_ = true;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash missing file: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char chunk[1 << 16];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
    const auto n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse(in);
}

KeyValueFile KeyValueFile::parse(std::istream& in) {
  KeyValueFile kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    std::string_view body = trim(hash == std::string::npos ? std::string_view(line)
                                                           : std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line missing '=': " + line);
    kv.set(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueFile::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, std::string fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? std::move(fallback) : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  const auto text = get(key);
  double out = 0.0;
  if (!parse_double(trim(text), out)) throw ConfigError("config key '" + key + "' is not a number");
  return out;
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
  const auto text = get(key);
  const auto t = trim(text);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("config key '" + key + "' is not an integer");
  return out;
}

std::int64_t KeyValueFile::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<std::string> KeyValueFile::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& key : order_)
    if (key.rfind(prefix, 0) == 0) out.push_back(key);
  return out;
}

void KeyValueFile::set(const std::string& key, std::string value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = std::move(value);
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  AtomicWriter w(path);
  for (const auto& key : order_) w.append(key + " = " + values_.at(key) + "\n");
  w.commit();
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto part : split_line(text)) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace txa

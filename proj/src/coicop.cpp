#include "txa/coicop.hpp"

#include "txa/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace txa {

namespace {

struct MccRow {
  int mcc;
  int category;
};

// Default correspondence between card-scheme merchant category codes and the
// 15-way consumption categories. Editable copy ships as data/mcc_coicop.csv.
constexpr MccRow kBuiltinTable[] = {
    // 01 food and non-alcoholic beverages
    {5300, 1}, {5411, 1}, {5422, 1}, {5441, 1}, {5451, 1}, {5462, 1}, {5499, 1},
    // 02 alcoholic beverages and tobacco
    {5921, 2}, {5993, 2},
    // 03 clothing and footwear
    {5137, 3}, {5139, 3}, {5611, 3}, {5621, 3}, {5631, 3}, {5641, 3}, {5651, 3},
    {5661, 3}, {5681, 3}, {5691, 3}, {5697, 3}, {5699, 3},
    // 04 housing, water, electricity, gas
    {1711, 4}, {1731, 4}, {1740, 4}, {1761, 4}, {4900, 4}, {5200, 4}, {5211, 4},
    {5231, 4}, {5251, 4}, {5261, 4}, {6513, 4},
    // 05 furnishings and household maintenance
    {5021, 5}, {5712, 5}, {5713, 5}, {5714, 5}, {5719, 5}, {5722, 5}, {7217, 5},
    {7641, 5},
    // 06 health
    {5912, 6}, {5975, 6}, {5976, 6}, {8011, 6}, {8021, 6}, {8031, 6}, {8041, 6},
    {8042, 6}, {8043, 6}, {8049, 6}, {8050, 6}, {8062, 6}, {8071, 6}, {8099, 6},
    // 07 transport (incl. fuel)
    {4111, 7}, {4112, 7}, {4121, 7}, {4131, 7}, {4511, 7}, {4582, 7}, {4789, 7},
    {5511, 7}, {5521, 7}, {5532, 7}, {5533, 7}, {5541, 7}, {5542, 7}, {5571, 7},
    {7523, 7}, {7531, 7}, {7538, 7}, {7542, 7},
    // 08 information and communication
    {4814, 8}, {4815, 8}, {4816, 8}, {4821, 8}, {4899, 8}, {5045, 8}, {5732, 8},
    {5734, 8}, {7372, 8}, {9402, 8},
    // 09 recreation and culture
    {5192, 9}, {5733, 9}, {5735, 9}, {5940, 9}, {5941, 9}, {5942, 9}, {5945, 9},
    {5946, 9}, {5947, 9}, {7221, 9}, {7829, 9}, {7832, 9}, {7922, 9}, {7929, 9},
    {7941, 9}, {7991, 9}, {7992, 9}, {7996, 9}, {7997, 9}, {7998, 9}, {7999, 9},
    // 10 education
    {8211, 10}, {8220, 10}, {8241, 10}, {8244, 10}, {8249, 10}, {8299, 10},
    // 11 restaurants and accommodation
    {3501, 11}, {5811, 11}, {5812, 11}, {5813, 11}, {5814, 11}, {7011, 11},
    {7032, 11},
    // 12 insurance and financial services
    {5960, 12}, {6010, 12}, {6011, 12}, {6012, 12}, {6051, 12}, {6211, 12},
    {6300, 12},
    // 13 personal care and miscellaneous goods/services
    {5311, 13}, {5331, 13}, {5399, 13}, {5977, 13}, {5999, 13}, {7210, 13},
    {7211, 13}, {7216, 13}, {7230, 13}, {7251, 13}, {7298, 13}, {7299, 13},
    {8351, 13},
    // 14 non-profit institutions serving households
    {8398, 14}, {8641, 14}, {8661, 14}, {8699, 14},
    // 15 government services
    {9211, 15}, {9222, 15}, {9311, 15}, {9399, 15},
};

}  // namespace

CoicopMapper CoicopMapper::builtin(int default_category) {
  CoicopMapper m;
  m.default_ = default_category;
  for (const auto& row : kBuiltinTable) m.table_.emplace(row.mcc, row.category);
  return m;
}

CoicopMapper CoicopMapper::load(const std::filesystem::path& path, int default_category) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mapping file: " + path.string());
  CoicopMapper m;
  m.default_ = default_category;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body(line);
    while (!body.empty() && (body.back() == '\r' || body.back() == ' ')) body.remove_suffix(1);
    if (body.empty() || body.front() == '#') continue;
    if (line_no == 1 && body.rfind("mcc", 0) == 0) continue;  // header
    const auto comma = body.find(',');
    if (comma == std::string_view::npos)
      throw SchemaError("mapping line " + std::to_string(line_no) + " is not 'mcc,coicop'");
    int mcc = 0, cat = 0;
    const auto a = body.substr(0, comma);
    const auto b = body.substr(comma + 1);
    auto ok1 = std::from_chars(a.data(), a.data() + a.size(), mcc);
    auto ok2 = std::from_chars(b.data(), b.data() + b.size(), cat);
    if (ok1.ec != std::errc{} || ok2.ec != std::errc{} || mcc < 0 || mcc > 9999 || cat < 1 ||
        cat > kCategoryCount)
      throw SchemaError("mapping line " + std::to_string(line_no) + " out of range");
    m.table_[mcc] = cat;
  }
  return m;
}

int CoicopMapper::map(int mcc) const {
  if (mcc < 0 || mcc > 9999) throw Error("mcc outside 0000-9999: " + std::to_string(mcc));
  if (auto it = table_.find(mcc); it != table_.end()) return it->second;
  unmapped_.fetch_add(1, std::memory_order_relaxed);
  return default_;
}

void CoicopMapper::save(const std::filesystem::path& path) const {
  std::vector<std::pair<int, int>> rows(table_.begin(), table_.end());
  std::sort(rows.begin(), rows.end());
  AtomicWriter w(path);
  w.append("mcc,coicop\n");
  for (const auto& [mcc, cat] : rows) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d,%02d\n", mcc, cat);
    w.append(buf);
  }
  w.commit();
}

std::vector<int> CoicopMapper::mcc_pool(int category) const {
  if (category < 1 || category > kCategoryCount)
    throw Error("category outside 1-15: " + std::to_string(category));
  std::vector<int> out;
  for (const auto& [mcc, cat] : table_)
    if (cat == category) out.push_back(mcc);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> merchant_categories(const TransactionTable& table, const CoicopMapper& mapper) {
  const auto mccs = table.merchant_mode_mcc();
  std::vector<int> out(mccs.size());
  for (std::size_t i = 0; i < mccs.size(); ++i) out[i] = mapper.map(mccs[i]);
  return out;
}

}  // namespace txa

#include "staging.hpp"

#include <algorithm>
#include <system_error>

#include "synthpop/error.hpp"

namespace fs = std::filesystem;

namespace synthpop::cli {

Staging::Staging(fs::path out) : out_(std::move(out)) {
  std::error_code ec;
  fs::create_directories(out_, ec);
  if (ec || !fs::is_directory(out_)) throw Error("cannot create output directory " + out_.string());
  staging_ = out_ / ".synthpop-staging";
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

Staging::~Staging() {
  if (committed_) return;
  std::error_code ec;
  fs::remove_all(staging_, ec);
}

fs::path Staging::file(const std::string& name) { return staging_ / name; }

std::vector<fs::path> Staging::commit() {
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(staging_)) entries.push_back(e.path().filename());
  std::sort(entries.begin(), entries.end());
  std::vector<fs::path> moved;
  for (const auto& name : entries) {
    const auto target = out_ / name;
    if (fs::is_directory(target)) fs::remove_all(target);
    fs::rename(staging_ / name, target);
    moved.push_back(target);
  }
  fs::remove_all(staging_);
  committed_ = true;
  return moved;
}

}  // namespace synthpop::cli

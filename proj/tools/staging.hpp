#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace synthpop::cli {

// Collects a command's outputs in a hidden directory next to the final
// location. commit() moves them into place; destruction without a commit
// deletes everything written so far.
class Staging {
 public:
  explicit Staging(std::filesystem::path out);
  ~Staging();
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  const std::filesystem::path& dir() const { return staging_; }
  std::filesystem::path file(const std::string& name);
  std::vector<std::filesystem::path> commit();

 private:
  std::filesystem::path out_;
  std::filesystem::path staging_;
  bool committed_ = false;
};

}  // namespace synthpop::cli

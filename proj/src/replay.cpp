#include <deque>
#include <map>
#include <memory>
#include <mutex>

#include "prmh/backend.hpp"
#include "prmh/error.hpp"

namespace prmh {

namespace {

// Serves canned completions from a fixture. In strict-order mode entries are
// consumed in file order regardless of the request; in keyed mode each
// request consumes the next entries whose request_key equals its prompt.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const BackendDescriptor& d)
      : entries_(d.replay_entries), keyed_(d.replay_keyed) {
    if (!entries_) {
      if (d.replay_path.empty()) {
        throw Error(ErrorKind::config, "replay backend: no fixture configured");
      }
      entries_ = std::make_shared<const std::vector<ReplayEntry>>(
          load_replay_fixture(d.replay_path));
    }
    if (keyed_) {
      for (std::size_t i = 0; i < entries_->size(); ++i) {
        by_key_[(*entries_)[i].request_key].push_back(i);
      }
    }
  }

  GenerationResult generate(const GenerationRequest& request) override {
    validate_request(request);
    std::vector<std::size_t> picked;
    picked.reserve(request.num_samples);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (keyed_) {
        auto it = by_key_.find(request.prompt);
        if (it == by_key_.end() || it->second.size() < static_cast<std::size_t>(request.num_samples)) {
          throw Error(ErrorKind::protocol,
                      "replay backend: fixture exhausted for this request key");
        }
        for (int i = 0; i < request.num_samples; ++i) {
          picked.push_back(it->second.front());
          it->second.pop_front();
        }
      } else {
        if (entries_->size() - cursor_ < static_cast<std::size_t>(request.num_samples)) {
          throw Error(ErrorKind::protocol, "replay backend: fixture exhausted");
        }
        for (int i = 0; i < request.num_samples; ++i) picked.push_back(cursor_++);
      }
    }

    GenerationResult result;
    bool any_scores = false;
    for (std::size_t idx : picked) {
      const ReplayEntry& e = (*entries_)[idx];
      result.texts.push_back(e.text);
      if (e.token_scores) any_scores = true;
    }
    if (any_scores) {
      for (std::size_t idx : picked) {
        result.token_scores.push_back((*entries_)[idx].token_scores);
      }
    }
    return result;
  }

 private:
  std::shared_ptr<const std::vector<ReplayEntry>> entries_;
  bool keyed_;
  std::mutex mu_;
  std::size_t cursor_ = 0;
  std::map<std::string, std::deque<std::size_t>> by_key_;
};

}  // namespace

std::shared_ptr<Backend> make_replay_backend(const BackendDescriptor& descriptor) {
  return std::make_shared<ReplayBackend>(descriptor);
}

}  // namespace prmh

#include "gsm/symbols.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gsm {

Symbol SymbolTable::intern(std::string_view text) {
    auto it = index_.find(std::string(text));
    if (it != index_.end()) return Symbol{it->second};
    auto id = static_cast<std::uint32_t>(texts_.size());
    texts_.emplace_back(text);
    index_.emplace(texts_.back(), id);
    return Symbol{id};
}

Symbol SymbolTable::lookup(std::string_view text) const {
    auto it = index_.find(std::string(text));
    return it == index_.end() ? Symbol{} : Symbol{it->second};
}

const std::string& SymbolTable::text(Symbol s) const {
    if (!s.valid() || s.id >= texts_.size())
        throw std::out_of_range("symbol id out of range");
    return texts_[s.id];
}

std::vector<std::uint32_t> SymbolTable::canonicalize() {
    std::vector<std::uint32_t> by_text(texts_.size());
    std::iota(by_text.begin(), by_text.end(), 0u);
    std::sort(by_text.begin(), by_text.end(),
              [&](std::uint32_t a, std::uint32_t b) { return texts_[a] < texts_[b]; });

    std::vector<std::uint32_t> remap(texts_.size());
    std::vector<std::string> sorted_texts(texts_.size());
    for (std::uint32_t rank = 0; rank < by_text.size(); ++rank) {
        remap[by_text[rank]] = rank;
        sorted_texts[rank] = std::move(texts_[by_text[rank]]);
    }
    texts_ = std::move(sorted_texts);
    index_.clear();
    for (std::uint32_t id = 0; id < texts_.size(); ++id) index_.emplace(texts_[id], id);
    return remap;
}

}  // namespace gsm

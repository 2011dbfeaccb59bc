#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gsm {

// An interned input or output label. Symbols are opaque text; equality is
// textual equality. Interning happens per model via SymbolTable.
struct Symbol {
    std::uint32_t id = kNone;

    static constexpr std::uint32_t kNone = 0xffffffffu;

    constexpr bool valid() const { return id != kNone; }
    friend constexpr bool operator==(Symbol a, Symbol b) { return a.id == b.id; }
    friend constexpr bool operator!=(Symbol a, Symbol b) { return a.id != b.id; }
    friend constexpr bool operator<(Symbol a, Symbol b) { return a.id < b.id; }
};

// String <-> Symbol mapping. canonicalize() reassigns ids so that id order
// equals textual order; builders call it once after the alphabet is known,
// and every container keyed on Symbol afterwards iterates in textual order.
class SymbolTable {
public:
    Symbol intern(std::string_view text);
    Symbol lookup(std::string_view text) const;  // kNone if absent
    const std::string& text(Symbol s) const;
    std::size_t size() const { return texts_.size(); }

    // Returns old-id -> new-id so callers can remap stored symbols.
    std::vector<std::uint32_t> canonicalize();

private:
    std::vector<std::string> texts_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

// Sorted flat map keyed on Symbol. Alphabets in this domain are small, so a
// sorted vector beats node-based maps on both memory and iteration order
// stability.
template <typename V>
class SymbolMap {
public:
    using Entry = std::pair<Symbol, V>;
    using const_iterator = typename std::vector<Entry>::const_iterator;
    using iterator = typename std::vector<Entry>::iterator;

    V* find(Symbol key) {
        auto it = lower_bound(key);
        return (it != items_.end() && it->first == key) ? &it->second : nullptr;
    }
    const V* find(Symbol key) const {
        auto it = lower_bound(key);
        return (it != items_.end() && it->first == key) ? &it->second : nullptr;
    }
    V& obtain(Symbol key) {
        auto it = lower_bound(key);
        if (it == items_.end() || it->first != key) it = items_.insert(it, {key, V{}});
        return it->second;
    }
    bool erase(Symbol key) {
        auto it = lower_bound(key);
        if (it == items_.end() || it->first != key) return false;
        items_.erase(it);
        return true;
    }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const_iterator begin() const { return items_.begin(); }
    const_iterator end() const { return items_.end(); }
    iterator begin() { return items_.begin(); }
    iterator end() { return items_.end(); }
    void clear() { items_.clear(); }

private:
    typename std::vector<Entry>::iterator lower_bound(Symbol key) {
        std::size_t lo = 0, hi = items_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (items_[mid].first < key) lo = mid + 1; else hi = mid;
        }
        return items_.begin() + lo;
    }
    typename std::vector<Entry>::const_iterator lower_bound(Symbol key) const {
        return const_cast<SymbolMap*>(this)->lower_bound(key);
    }

    std::vector<Entry> items_;
};

}  // namespace gsm

#include "rtlab/domain_state.hpp"

#include <string>

#include "rtlab/errors.hpp"

namespace rtlab {

namespace {

DomainMask full_domain(int n) { return n == 64 ? ~DomainMask{0} : (DomainMask{1} << n) - 1; }

}  // namespace

DomainState::DomainState(int order) : n_(order) {
    if (order < 1 || order > kMaxOrder) throw StructuralError("order out of range: " + std::to_string(order));
    domains_.assign(static_cast<std::size_t>(n_) * n_, full_domain(n_));
    values_.assign(domains_.size(), 0);
    row_open_.assign(n_, n_);
    col_open_.assign(n_, n_);
    unassigned_ = n_ * n_;
    total_domain_ = static_cast<long>(unassigned_) * n_;
    size_hist_[n_] = unassigned_;
}

DomainState DomainState::from_instance(const PartialLatinSquare& instance) {
    DomainState s(instance.order());
    for (int r = 0; r < s.n_; ++r) {
        for (int c = 0; c < s.n_; ++c) {
            if (const Cell& v = instance.at(r, c)) s.assign(s.cell(r, c), *v);
        }
    }
    return s;
}

int DomainState::min_domain() const noexcept {
    for (int k = 0; k <= n_; ++k) {
        if (size_hist_[k] > 0) return k;
    }
    return 0;
}

int DomainState::degree(int cell) const noexcept {
    int d = row_open_[row_of(cell)] + col_open_[col_of(cell)];
    return assigned(cell) ? d : d - 2;
}

void DomainState::set_domain(int cell, DomainMask mask) {
    if (assigned(cell)) throw StructuralError("set_domain on an assigned cell");
    mask &= full_domain(n_);
    int before = std::popcount(domains_[cell]);
    int after = std::popcount(mask);
    --size_hist_[before];
    ++size_hist_[after];
    total_domain_ += after - before;
    domains_[cell] = mask;
}

void DomainState::assign(int cell, int symbol) {
    if (symbol < 1 || symbol > n_) throw StructuralError("symbol out of range: " + std::to_string(symbol));
    if (assigned(cell)) throw StructuralError("cell already assigned");
    int before = std::popcount(domains_[cell]);
    --size_hist_[before];
    total_domain_ -= before;
    --unassigned_;
    --row_open_[row_of(cell)];
    --col_open_[col_of(cell)];
    domains_[cell] = symbol_bit(symbol);
    values_[cell] = static_cast<std::uint8_t>(symbol);
    pending_.push_back(cell);
    mark_dirty(cell);
}

int DomainState::remove(int cell, DomainMask symbols) {
    DomainMask& d = domains_[cell];
    int before = std::popcount(d);
    d &= ~symbols;
    int after = std::popcount(d);
    if (after != before) {
        --size_hist_[before];
        ++size_hist_[after];
        total_domain_ -= before - after;
        mark_dirty(cell);
    }
    return after;
}

PartialLatinSquare DomainState::to_square() const {
    PartialLatinSquare sq(n_);
    for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < n_; ++c) {
            int i = cell(r, c);
            if (assigned(i)) sq.set(r, c, value(i));
        }
    }
    return sq;
}

}  // namespace rtlab

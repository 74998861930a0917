#pragma once

#include <vector>

namespace fairkm {

// DP state for a split-tree block: exact number of facilities opened inside
// the block plus, per portal, the per-color counts of clients entering
// (nonnegative) and leaving (nonpositive) through that portal.
struct DoublingConfig {
    int block = -1;
    int k = 0;
    std::vector<std::vector<int>> enter; // [portal][color], 0..n
    std::vector<std::vector<int>> leave; // [portal][color], -n..0

    static DoublingConfig zero(int block, int portals, int colors) {
        DoublingConfig c;
        c.block = block;
        c.k = 0;
        c.enter.assign(portals, std::vector<int>(colors, 0));
        c.leave.assign(portals, std::vector<int>(colors, 0));
        return c;
    }

    int enter_total(int color) const {
        int s = 0;
        for (const auto& q : enter) s += q[color];
        return s;
    }
    int leave_total_abs(int color) const {
        int s = 0;
        for (const auto& q : leave) s -= q[color];
        return s;
    }
    // signed sum of enter and leave counts for one color
    int net(int color) const { return enter_total(color) - leave_total_abs(color); }
};

} // namespace fairkm

#ifndef RWRE_RWRE_HPP
#define RWRE_RWRE_HPP

#include "rwre/vec.hpp"
#include "rwre/stream.hpp"
#include "rwre/jump_law.hpp"
#include "rwre/environment.hpp"
#include "rwre/parallel.hpp"
#include "rwre/stats.hpp"
#include "rwre/walk.hpp"
#include "rwre/diff_chain.hpp"
#include "rwre/analysis.hpp"
#include "rwre/config.hpp"
#include "rwre/report.hpp"
#include "rwre/runner.hpp"

#endif  // RWRE_RWRE_HPP

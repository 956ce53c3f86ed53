#pragma once

#include "ruckep/error.hpp"
#include "ruckep/format.hpp"
#include "ruckep/geometry.hpp"
#include "ruckep/csv.hpp"
#include "ruckep/phase_ingest.hpp"
#include "ruckep/glm/design.hpp"
#include "ruckep/glm/ols.hpp"
#include "ruckep/glm/bspline.hpp"
#include "ruckep/glm/tensor_smooth.hpp"
#include "ruckep/glm/irls.hpp"
#include "ruckep/glm/smoothing.hpp"
#include "ruckep/restart_table.hpp"
#include "ruckep/kick_model.hpp"
#include "ruckep/lineout_model.hpp"
#include "ruckep/decision.hpp"
#include "ruckep/regret.hpp"
#include "ruckep/export.hpp"
#include "ruckep/bundle.hpp"

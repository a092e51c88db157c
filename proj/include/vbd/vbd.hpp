#pragma once

#include "vbd/battery.hpp"
#include "vbd/bundles.hpp"
#include "vbd/checks.hpp"
#include "vbd/csv.hpp"
#include "vbd/distributions.hpp"
#include "vbd/geometry.hpp"
#include "vbd/linalg.hpp"
#include "vbd/random_fields.hpp"
#include "vbd/rng.hpp"
#include "vbd/scene.hpp"
#include "vbd/sections.hpp"
#include "vbd/smoothing.hpp"
#include "vbd/vdist.hpp"

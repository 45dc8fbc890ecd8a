#pragma once

#include "mdlvq/analysis.hpp"
#include "mdlvq/assignment.hpp"
#include "mdlvq/binning.hpp"
#include "mdlvq/codec.hpp"
#include "mdlvq/csv.hpp"
#include "mdlvq/imat.hpp"
#include "mdlvq/labeling.hpp"
#include "mdlvq/lattice.hpp"
#include "mdlvq/nested.hpp"
#include "mdlvq/oracle.hpp"
#include "mdlvq/parallel.hpp"
#include "mdlvq/rng.hpp"
#include "mdlvq/serialize.hpp"
#include "mdlvq/weights.hpp"

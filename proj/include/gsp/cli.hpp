#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gsp/domain_transform.hpp"
#include "gsp/graph.hpp"
#include "gsp/image.hpp"

namespace gsp::cli {

enum class Smoother { DomainTransform, Bilateral };

struct StylizeParams {
  Smoother smoother = Smoother::DomainTransform;
  WarpParams warp{1.0, 10.0, 3.0};
  int passes = 3;
  GridWeightParams bilateral{2.0, 0.1, 8, true};
  int bilateral_radius = 2;
  // Normalized Sobel magnitude (in [0, 1]) above which a pixel is an edge.
  double edge_threshold = 0.15;

  void validate() const;
};

// Sobel gradient magnitude scaled by 1 / (4 sqrt 2) so that it lies in [0, 1]
// for [0, 1] inputs. Borders replicate; multi-channel inputs use the channel
// mean.
std::vector<double> sobel_magnitude(const ImagePlane& img);

// Smooth, then set pixels whose Sobel magnitude exceeds the threshold to 0.
ImagePlane stylize(const ImagePlane& img, const StylizeParams& params);

// Runs one command (arguments exclude the program name). Returns 0 on
// success, 2 on usage errors, 1 on processing errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsp::cli

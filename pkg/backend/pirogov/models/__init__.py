# Domain values: lattice regions, series, polymers, contours, clusters

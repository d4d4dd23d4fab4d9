"""r-move k-partitioning: exact oracle, LP relaxations and approximation algorithms."""

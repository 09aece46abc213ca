"""Pro-p Iwahori-Hecke modules and coefficient systems on rank-one trees."""

__version__ = "0.1.0"

# Leftover Pi

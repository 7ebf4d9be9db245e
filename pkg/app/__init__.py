"""superburst: factibilidad de superradiancia de Dicke en arreglos ordenados."""

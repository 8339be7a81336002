# Routes package 
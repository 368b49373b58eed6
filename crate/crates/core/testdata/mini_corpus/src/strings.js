let greeting = "Hello, World";
let lower = greeting.toLowerCase();
let parts = greeting.split(", ");
let n = parts.length;
let big = lower.toUpperCase();

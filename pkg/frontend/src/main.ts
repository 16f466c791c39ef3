import "./style.css";
import { StudioApp } from "./ui/app";

new StudioApp(document.getElementById("app")!);
